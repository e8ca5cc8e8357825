"""Line-chart rendering of sweep results.

One SVG per sweep parameter: x = sweep value, y = cost normalized by the
offline optimum, one series per algorithm.  Rendering is byte-deterministic
(fixed hash salt, no embedded date), so re-rendering the same CSV reproduces
identical files.  Plotting never touches the results files.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

from .errors import ConfigError
from .experiments import RESULTS_HEADER


def read_results_csv(path) -> list[dict]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty results file") from None
        if header != RESULTS_HEADER:
            raise ConfigError(f"{path}: unexpected results schema {header}")
        rows = [dict(zip(header, row)) for row in reader]
    if not rows:
        raise ConfigError(f"{path}: no result rows")
    return rows


def render_plots(results_csv, output_dir) -> list[Path]:
    """Render one chart per sweep parameter found in the results CSV."""
    rows = read_results_csv(results_csv)
    sweeps: dict[str, dict[str, list[tuple[float, float]]]] = defaultdict(
        lambda: defaultdict(list))
    for row in rows:
        if not row["sweep_param"] or row["bound_satisfied"] == "failed":
            continue
        if not row["cr_vs_opt"]:
            continue
        sweeps[row["sweep_param"]][row["algorithm"]].append(
            (float(row["sweep_value"]), float(row["cr_vs_opt"])))
    if not sweeps:
        raise ConfigError("results contain no plottable sweep rows")

    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "smoothtrack"
    import matplotlib.pyplot as plt

    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for param in sorted(sweeps):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for algorithm in sorted(sweeps[param]):
            pts = sorted(sweeps[param][algorithm])
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                    label=algorithm)
        ax.set_xlabel(param)
        ax.set_ylabel("cost / offline optimum")
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out_path = out_dir / f"sweep_{param}.svg"
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(out_path)
    return written
