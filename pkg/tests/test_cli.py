import json
import subprocess
import sys

import pytest

from smoothtrack.cli import main
from smoothtrack.plotting import read_results_csv, render_plots


def write_config(tmp_path, **overrides):
    cfg = {
        "seed": 1,
        "output_dir": str(tmp_path / "out"),
        "params": {"w": 1, "lambda1": 1.0, "lambda2": 0.1, "d": 1,
                   "domain": [0.0, 1.0]},
        "instance": {"source": "synthetic", "T": 30,
                     "generator": {"kind": "random_walk", "step_sigma": 0.08}},
        "algorithms": [{"name": "iga"}, {"name": "best"},
                       {"name": "cort",
                        "predictor": {"kind": "pessimistic"}, "theta": 0.5}],
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestExitCodes:
    def test_run_ok(self, tmp_path, capsys):
        assert main(["run", str(write_config(tmp_path))]) == 0
        assert (tmp_path / "out" / "results.csv").exists()

    def test_run_rejects_sweep_config(self, tmp_path):
        path = write_config(tmp_path,
                            sweep={"param": "lambda1", "values": [1.0, 2.0]})
        assert main(["run", str(path)]) == 2

    def test_sweep_rejects_plain_config(self, tmp_path):
        assert main(["sweep", str(write_config(tmp_path))]) == 2

    def test_config_error_is_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run", str(bad)]) == 2

    def test_bounds_ok_is_0(self, tmp_path):
        path = write_config(tmp_path, bounds={"n_random": 6, "n_gap": 2,
                                              "T": 12})
        assert main(["bounds", str(path)]) == 0

    def test_bounds_condition_gated_batch_ok(self, tmp_path):
        # Large window with a tiny perturbation weight: the informed-greedy
        # CR bound's condition fails, so those rows are not-applicable and
        # the batch still exits 0.
        path = write_config(tmp_path, bounds={"n_random": 4, "n_gap": 0,
                                              "T": 12})
        import json
        cfg = json.loads(path.read_text())
        cfg["params"].update(w=10, lambda1=0.01)
        path.write_text(json.dumps(cfg))
        assert main(["bounds", str(path)]) == 0

    def test_bounds_violation_is_3(self, tmp_path, monkeypatch):
        import smoothtrack.experiments as exp
        from smoothtrack import run_iga as informed
        monkeypatch.setattr(exp, "run_best",
                            lambda inst, settings=None, **kw: informed(inst, settings))
        path = write_config(tmp_path, bounds={"n_random": 2, "n_gap": 0,
                                              "T": 12})
        assert main(["bounds", str(path)]) == 3

    def test_gen_unknown_generator_is_2(self, tmp_path):
        assert main(["gen", "nope", str(tmp_path / "x.csv")]) == 2

    def test_failed_cells_exit_4(self, tmp_path, monkeypatch):
        import smoothtrack.experiments as exp
        from smoothtrack.errors import SolverError

        def boom(instance, settings=None):
            raise SolverError("forced", gradient_norm=1.0)

        monkeypatch.setattr(exp, "offline_optimal", boom)
        path = write_config(tmp_path)
        assert main(["run", str(path)]) == 4
        assert (tmp_path / "out" / "results.csv").exists()


class TestGen:
    def test_demo_trace_roundtrip(self, tmp_path):
        out = tmp_path / "trace.csv"
        assert main(["gen", "demo-trace", str(out), "--days", "1"]) == 0
        from smoothtrack import read_trace_csv
        assert len(read_trace_csv(out)) == 288

    def test_matches_shipped_data(self, tmp_path):
        out = tmp_path / "trace.csv"
        assert main(["gen", "demo-trace", str(out)]) == 0
        import pathlib
        shipped = pathlib.Path(__file__).resolve().parent.parent / "data" / "demo_trace.csv"
        assert out.read_bytes() == shipped.read_bytes()


class TestPlot:
    def test_renders_and_deterministic(self, tmp_path):
        path = write_config(tmp_path,
                            sweep={"param": "lambda1",
                                   "values": [0.5, 1.0, 2.0]})
        assert main(["sweep", str(path)]) == 0
        results = tmp_path / "out" / "results.csv"
        d1, d2 = tmp_path / "charts1", tmp_path / "charts2"
        assert main(["plot", str(results), str(d1)]) == 0
        assert main(["plot", str(results), str(d2)]) == 0
        f1 = d1 / "sweep_lambda1.svg"
        f2 = d2 / "sweep_lambda1.svg"
        assert f1.exists()
        assert f1.read_bytes() == f2.read_bytes()

    def test_empty_csv_is_error(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert main(["plot", str(empty), str(tmp_path / "charts")]) == 2
        assert not (tmp_path / "charts" / "sweep_lambda1.svg").exists()

    def test_schema_mismatch(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(Exception):
            read_results_csv(bad)

    def test_unswept_results_not_plottable(self, tmp_path):
        path = write_config(tmp_path)
        assert main(["run", str(path)]) == 0
        assert main(["plot", str(tmp_path / "out" / "results.csv"),
                     str(tmp_path / "charts")]) == 2


def test_module_invocation():
    proc = subprocess.run([sys.executable, "-m", "smoothtrack.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "smoothtrack" in proc.stdout
