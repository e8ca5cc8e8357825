"""Configuration-driven experiment runner.

A single JSON document describes one experiment: problem parameters, the
instance source (trace / synthetic / prediction-gap family), the algorithm
roster, and an optional one-parameter sweep.  Each sweep cell rebuilds the
instance, runs the offline optimum plus every configured algorithm, and
contributes one results row per algorithm:

    algorithm,sweep_param,sweep_value,total,tracking,adversarial,switching,
    cr_vs_opt,df_vs_iga,bound_name,bound_value,bound_satisfied

Runs are deterministic given the config: identical config and seed produce
byte-identical CSV output.  Failed cells are recorded and never abort
sibling cells.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .bounds import (BoundReport, best_df_bound, cort_consistency_term,
                     empirical_ratio, iga_cr_bound, pga_df_lower_bound)
from .errors import ConfigError, SmoothTrackError, SolverError
from .instances import (DEFAULT_SCHEDULE, PiecewiseConstant, RandomWalk,
                        TauSchedule, gen_prediction_gap_instance,
                        gen_random_instance, load_trace_csv)
from .model import Box, FunctionSpec, Instance, ProblemParams, RunResult, \
    make_function
from .policies import run_best, run_cort, run_iga, run_naive_greedy, run_pga
from .predictors import (PredictionStream, file_predictor,
                         moving_average_predictor, perfect_predictor,
                         persistence_predictor, pessimistic_predictor)
from .solvers import DEFAULT_SETTINGS, SolverSettings, offline_optimal

RESULTS_HEADER = ["algorithm", "sweep_param", "sweep_value", "total",
                  "tracking", "adversarial", "switching", "cr_vs_opt",
                  "df_vs_iga", "bound_name", "bound_value", "bound_satisfied"]

SWEEPABLE = ("lambda1", "lambda2", "w", "theta", "tau_mean_shift")


# ---------------------------------------------------------------------------
# Config schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PredictorSpec:
    kind: str
    lag: int = 1
    window: int = 1
    path: str | None = None

    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    predictor: PredictorSpec | None = None
    theta: float = 0.5

    def label(self) -> str:
        if self.predictor is not None:
            return f"{self.name}-{self.predictor.label()}"
        return self.name


@dataclass(frozen=True)
class TraceSource:
    path: str
    schedule: TauSchedule = DEFAULT_SCHEDULE
    shift: float = 0.0


@dataclass(frozen=True)
class SyntheticSource:
    generator: Any
    T: int
    seed: int | None = None


@dataclass(frozen=True)
class PredictionGapSource:
    u0: tuple[float, ...]
    e_min: float
    e_max: float
    T: int
    seed: int | None = None


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class BoundsBatch:
    n_random: int = 200
    n_gap: int = 20
    T: int = 24


@dataclass(frozen=True)
class ExperimentConfig:
    params: ProblemParams
    f: FunctionSpec
    source: Any
    algorithms: tuple[AlgorithmSpec, ...]
    sweep: SweepSpec | None = None
    seed: int = 0
    output_dir: str = "out"
    bounds_batch: BoundsBatch = field(default_factory=BoundsBatch)
    workers: int = 0  # 0 = auto


def _need(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ConfigError(f"{path}.{key}: missing required field")
    return mapping[key]


def _parse_domain(raw, path: str, d: int) -> Box | None:
    if raw is None:
        return None
    try:
        if isinstance(raw, dict):
            return Box(np.asarray(raw["lower"], float),
                       np.asarray(raw["upper"], float))
        lo, hi = raw
        return Box.uniform(float(lo), float(hi), d)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: invalid domain ({exc})") from None


def _parse_params(raw: dict, path: str) -> ProblemParams:
    try:
        d = int(raw.get("d", 1))
        return ProblemParams(
            w=int(_need(raw, "w", path)),
            lambda1=float(_need(raw, "lambda1", path)),
            lambda2=float(_need(raw, "lambda2", path)),
            d=d,
            domain=_parse_domain(raw.get("domain"), f"{path}.domain", d))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_function(raw: dict, path: str) -> FunctionSpec:
    kind = _need(raw, "kind", path)
    kwargs = {k: v for k, v in raw.items() if k != "kind"}
    try:
        return make_function(kind, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_schedule(raw, path: str) -> TauSchedule:
    if raw is None:
        return DEFAULT_SCHEDULE
    try:
        return TauSchedule(
            bands=tuple((int(a), int(b), float(v)) for a, b, v in raw["bands"]),
            slots_per_day=int(raw.get("slots_per_day", 288)))
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: invalid schedule ({exc})") from None


def _parse_source(raw: dict, path: str) -> Any:
    kind = _need(raw, "source", path)
    if kind == "trace":
        return TraceSource(
            path=str(_need(raw, "path", path)),
            schedule=_parse_schedule(raw.get("schedule"), f"{path}.schedule"),
            shift=float(raw.get("shift", 0.0)))
    if kind == "synthetic":
        gen_raw = raw.get("generator", {"kind": "random_walk"})
        gkind = gen_raw.get("kind", "random_walk")
        if gkind == "random_walk":
            gen = RandomWalk(step_sigma=float(gen_raw.get("step_sigma", 0.05)))
        elif gkind == "piecewise_constant":
            gen = PiecewiseConstant(
                segment_len=int(gen_raw.get("segment_len", 24)),
                levels=tuple(gen_raw.get("levels", (0.2, 0.4, 0.6, 0.8))))
        else:
            raise ConfigError(f"{path}.generator.kind: unknown {gkind!r}")
        return SyntheticSource(generator=gen, T=int(_need(raw, "T", path)),
                               seed=raw.get("seed"))
    if kind == "prediction_gap":
        u0 = raw.get("u0", [1.0])
        if np.isscalar(u0):
            u0 = [u0]
        return PredictionGapSource(
            u0=tuple(float(v) for v in u0),
            e_min=float(raw.get("e_min", 1e-3)),
            e_max=float(raw.get("e_max", 0.5)),
            T=int(_need(raw, "T", path)),
            seed=raw.get("seed"))
    raise ConfigError(f"{path}.source: unknown {kind!r}")


def _parse_predictor(raw, path: str) -> PredictorSpec:
    kind = _need(raw, "kind", path)
    if kind not in ("perfect", "pessimistic", "persistence", "moving_average",
                    "file"):
        raise ConfigError(f"{path}.kind: unknown predictor {kind!r}")
    spec = PredictorSpec(kind=kind, lag=int(raw.get("lag", 1)),
                         window=int(raw.get("window", 1)),
                         path=raw.get("path"))
    if kind == "file" and not spec.path:
        raise ConfigError(f"{path}.path: required for file predictor")
    if spec.lag < 1 or spec.window < 1:
        raise ConfigError(f"{path}: lag and window must be >= 1")
    return spec


def _parse_algorithms(raw, path: str) -> tuple[AlgorithmSpec, ...]:
    if not raw:
        raise ConfigError(f"{path}: at least one algorithm required")
    specs = []
    for i, item in enumerate(raw):
        p = f"{path}[{i}]"
        name = _need(item, "name", p)
        if name in ("iga", "best", "naive"):
            specs.append(AlgorithmSpec(name=name))
        elif name in ("pga", "cort"):
            pred = _parse_predictor(_need(item, "predictor", p),
                                    f"{p}.predictor")
            theta = float(item.get("theta", 0.5))
            if name == "cort" and theta < 0:
                raise ConfigError(f"{p}.theta: must be nonnegative")
            specs.append(AlgorithmSpec(name=name, predictor=pred, theta=theta))
        else:
            raise ConfigError(f"{p}.name: unknown algorithm {name!r}")
    labels = [s.label() for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{path}: duplicate algorithm labels {labels}")
    return tuple(specs)


def _parse_sweep(raw, path: str, config_partial) -> SweepSpec | None:
    if raw is None:
        return None
    param = _need(raw, "param", path)
    if param not in SWEEPABLE:
        raise ConfigError(f"{path}.param: must be one of {SWEEPABLE}")
    values = _need(raw, "values", path)
    if not values:
        raise ConfigError(f"{path}.values: must be non-empty")
    vals = []
    for i, v in enumerate(values):
        v = float(v)
        if param in ("lambda1", "lambda2") and v <= 0:
            raise ConfigError(f"{path}.values[{i}]: {param} must be positive")
        if param == "theta" and v < 0:
            raise ConfigError(f"{path}.values[{i}]: theta must be nonnegative")
        if param == "w":
            if v != int(v) or v < 0:
                raise ConfigError(f"{path}.values[{i}]: w must be a "
                                  "nonnegative integer")
            v = int(v)
        vals.append(v)
    if param == "theta" and not any(a.name == "cort"
                                    for a in config_partial["algorithms"]):
        raise ConfigError(f"{path}.param: theta sweep needs a cort algorithm")
    if param == "tau_mean_shift" and not isinstance(config_partial["source"],
                                                    TraceSource):
        raise ConfigError(f"{path}.param: tau_mean_shift sweep needs a "
                          "trace source")
    return SweepSpec(param=param, values=tuple(vals))


def parse_config(raw: dict | str | Path) -> ExperimentConfig:
    """Validate a config document (dict, JSON string, or path to one)."""
    if isinstance(raw, (str, Path)):
        path = Path(raw)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    params = _parse_params(_need(raw, "params", "config"), "config.params")
    f = _parse_function(raw.get("f", {"kind": "quadratic", "c": 1.0}),
                        "config.f")
    source = _parse_source(_need(raw, "instance", "config"), "config.instance")
    algorithms = _parse_algorithms(_need(raw, "algorithms", "config"),
                                   "config.algorithms")
    sweep = _parse_sweep(raw.get("sweep"), "config.sweep",
                         {"algorithms": algorithms, "source": source})
    braw = raw.get("bounds", {})
    batch = BoundsBatch(n_random=int(braw.get("n_random", 200)),
                        n_gap=int(braw.get("n_gap", 20)),
                        T=int(braw.get("T", 24)))
    return ExperimentConfig(
        params=params, f=f, source=source, algorithms=algorithms, sweep=sweep,
        seed=int(raw.get("seed", 0)), output_dir=str(raw.get("output_dir", "out")),
        bounds_batch=batch, workers=int(raw.get("workers", 0)))


# ---------------------------------------------------------------------------
# Cell execution
# ---------------------------------------------------------------------------

def _apply_sweep(config: ExperimentConfig, value) -> tuple[ProblemParams, Any,
                                                           tuple[AlgorithmSpec, ...]]:
    params, source, algos = config.params, config.source, config.algorithms
    if config.sweep is None or value is None:
        return params, source, algos
    param = config.sweep.param
    if param == "lambda1":
        params = params.replace(lambda1=float(value))
    elif param == "lambda2":
        params = params.replace(lambda2=float(value))
    elif param == "w":
        params = params.replace(w=int(value))
    elif param == "theta":
        algos = tuple(replace(a, theta=float(value)) if a.name == "cort" else a
                      for a in algos)
    elif param == "tau_mean_shift":
        source = replace(source, shift=source.shift + float(value))
    return params, source, algos


def build_instance(config: ExperimentConfig, params: ProblemParams,
                   source) -> tuple[Instance, PredictionStream | None]:
    """Instance for one cell; the gap family also yields its stream."""
    if isinstance(source, TraceSource):
        schedule = source.schedule
        if source.shift:
            schedule = schedule.shifted(source.shift)
        return load_trace_csv(source.path, schedule, params, config.f), None
    if isinstance(source, SyntheticSource):
        seed = config.seed if source.seed is None else source.seed
        return gen_random_instance(seed, source.T, params, source.generator,
                                   config.f), None
    if isinstance(source, PredictionGapSource):
        seed = config.seed if source.seed is None else source.seed
        rng = np.random.default_rng(seed)
        errors = rng.uniform(source.e_min, source.e_max, size=source.T)
        inst, stream = gen_prediction_gap_instance(
            np.asarray(source.u0), errors, source.e_min, params, config.f)
        return inst, stream
    raise ConfigError(f"unhandled instance source {source!r}")


def _build_predictions(spec: PredictorSpec, instance: Instance,
                       gap_stream: PredictionStream | None,
                       settings: SolverSettings) -> PredictionStream:
    if gap_stream is not None:
        # The gap family carries its own adversarial stream by construction.
        return gap_stream
    if spec.kind == "perfect":
        return perfect_predictor(instance)
    if spec.kind == "pessimistic":
        return pessimistic_predictor(instance, settings)
    if spec.kind == "persistence":
        return persistence_predictor(instance, spec.lag)
    if spec.kind == "moving_average":
        return moving_average_predictor(instance, spec.window)
    stream = file_predictor(spec.path)
    stream.validate_against(instance)
    return stream


def _run_algorithm(spec: AlgorithmSpec, instance: Instance,
                   gap_stream: PredictionStream | None,
                   settings: SolverSettings) -> RunResult:
    if spec.name == "iga":
        return run_iga(instance, settings)
    if spec.name == "best":
        return run_best(instance, settings)
    if spec.name == "naive":
        return run_naive_greedy(instance, settings)
    preds = _build_predictions(spec.predictor, instance, gap_stream, settings)
    if spec.name == "pga":
        return run_pga(instance, preds, settings)
    return run_cort(instance, preds, spec.theta, settings)


def _row_bound(spec_name: str, instance: Instance, result: RunResult,
               iga_cost: float, theta: float) -> tuple[str, float | None,
                                                       str]:
    """Per-row bound columns: (name, value, satisfied-marker)."""
    p, f = instance.params, instance.f
    if spec_name == "iga":
        rep = iga_cr_bound(p, f.m)
        if not rep.condition_holds:
            return rep.name, None, "na"
        ratio = result.extras.get("cr_vs_opt")
        if ratio is None:
            return rep.name, rep.bound_value, "na"
        ok = ratio <= rep.bound_value * (1 + 1e-6)
        return rep.name, rep.bound_value, "true" if ok else "false"
    if spec_name == "best":
        rep = best_df_bound(p, f.m, f.ell)
        ratio = empirical_ratio(result.total_cost, iga_cost)
        if ratio is None:
            return rep.name, rep.bound_value, "na"
        ok = ratio <= rep.bound_value * (1 + 1e-6)
        return rep.name, rep.bound_value, "true" if ok else "false"
    if spec_name == "pga" and instance.meta.get("source") == "prediction_gap":
        lb = pga_df_lower_bound(f.m, instance.meta["errors"],
                                instance.meta["e_min"], f,
                                instance.meta.get("direction"))
        ratio = empirical_ratio(result.total_cost, iga_cost)
        if ratio is None:
            return "pga_df_lower", lb, "na"
        ok = ratio >= lb * (1 - 1e-6)
        return "pga_df_lower", lb, "true" if ok else "false"
    if spec_name == "cort":
        term = cort_consistency_term(p, f.m, f.ell, theta)
        return "cort_consistency_term", term, "na"
    return "", None, ""


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _run_cell(config: ExperimentConfig, value) -> list[list[str]]:
    sweep_param = config.sweep.param if config.sweep and value is not None else ""
    sval = _fmt(float(value)) if value is not None else ""
    params, source, algos = _apply_sweep(config, value)
    settings = DEFAULT_SETTINGS

    def failed_row(label, why):
        return [label, sweep_param, sval, "", "", "", "", "", "",
                f"error:{why}", "", "failed"]

    instance, gap_stream = build_instance(config, params, source)
    try:
        opt = offline_optimal(instance, settings)
        iga = run_iga(instance, settings)
    except SolverError as exc:
        rows = [failed_row("opt", type(exc).__name__)]
        rows += [failed_row(a.label(), type(exc).__name__) for a in algos]
        return rows

    opt_cost, iga_cost = opt.total_cost, iga.total_cost
    rows = []
    tot = opt.total
    rows.append(["opt", sweep_param, sval, _fmt(tot.total), _fmt(tot.tracking),
                 _fmt(tot.adversarial), _fmt(tot.switching), _fmt(1.0),
                 _fmt(empirical_ratio(opt_cost, iga_cost)), "", "", ""])
    for spec in algos:
        label = spec.label()
        try:
            result = (iga if spec.name == "iga"
                      else _run_algorithm(spec, instance, gap_stream, settings))
        except (SolverError, SmoothTrackError) as exc:
            rows.append(failed_row(label, type(exc).__name__))
            continue
        cr = empirical_ratio(result.total_cost, opt_cost)
        df = empirical_ratio(result.total_cost, iga_cost)
        result.extras["cr_vs_opt"] = cr
        bname, bval, bsat = _row_bound(spec.name, instance, result, iga_cost,
                                       spec.theta)
        tot = result.total
        rows.append([label, sweep_param, sval, _fmt(tot.total),
                     _fmt(tot.tracking), _fmt(tot.adversarial),
                     _fmt(tot.switching), _fmt(cr), _fmt(df), bname,
                     _fmt(bval), bsat])
    return rows


def run_experiment(config: ExperimentConfig,
                   results_name: str = "results.csv") -> Path:
    """Execute the configured run (or sweep) and write the results CSV.

    Sweep cells run in a small thread pool; rows are assembled in sweep
    order, so parallelism never changes output bytes.  Failed cells are
    marked in their rows; use ``run_experiment_report`` to also get the
    failed-row count.
    """
    path, _ = run_experiment_report(config, results_name)
    return path


def run_experiment_report(config: ExperimentConfig,
                          results_name: str = "results.csv"
                          ) -> tuple[Path, int]:
    """Like run_experiment, also returning the number of failed rows."""
    values = list(config.sweep.values) if config.sweep else [None]
    if config.sweep and len(values) > 1:
        workers = config.workers or min(len(values), os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cell_rows = list(pool.map(lambda v: _run_cell(config, v), values))
    else:
        cell_rows = [_run_cell(config, v) for v in values]

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / results_name
    failed = 0
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for rows in cell_rows:
            writer.writerows(rows)
            failed += sum(1 for row in rows if row[-1] == "failed")
    return out_path, failed


# ---------------------------------------------------------------------------
# Bound validation batch
# ---------------------------------------------------------------------------

@dataclass
class BoundViolation:
    seed: int
    family: str
    name: str
    detail: str


def validate_bounds(config: ExperimentConfig, verbose: bool = False
                    ) -> tuple[list[BoundViolation], int, int]:
    """Fuzzing batch: seeded random instances plus the prediction-gap family.

    Checks the informed-greedy competitive bound, the blind-policy
    degradation bound, the theta=0 trust-policy/blind-policy equality, the
    offline-dominance ordering, and the prediction-gap lower bound.  Returns
    (violations, checked_count, solver_failures); every violation carries
    the seed that reproduces it.
    """
    settings = DEFAULT_SETTINGS
    batch = config.bounds_batch
    violations: list[BoundViolation] = []
    failures = 0
    checked = 0

    params = config.params.replace(domain=None)
    for seed in range(batch.n_random):
        try:
            inst = gen_random_instance(seed, batch.T, params, RandomWalk(0.08),
                                       config.f)
            opt = offline_optimal(inst, settings)
            iga = run_iga(inst, settings)
            best = run_best(inst, settings)
            cort0 = run_cort(inst, np.zeros_like(inst.u), 0.0, settings)
        except SolverError as exc:
            failures += 1
            violations.append(BoundViolation(seed, "random", "solver_failure",
                                             str(exc)))
            continue
        checked += 1
        costs = {"opt": opt.total_cost, "iga": iga.total_cost,
                 "best": best.total_cost}
        for name, cost in costs.items():
            if name != "opt" and costs["opt"] > cost * (1 + 1e-6):
                violations.append(BoundViolation(
                    seed, "random", "offline_dominance",
                    f"opt {costs['opt']:.6g} > {name} {cost:.6g}"))
        rep = iga_cr_bound(inst.params, config.f.m)
        ratio = empirical_ratio(costs["iga"], costs["opt"])
        if rep.condition_holds and ratio is not None and \
                ratio > rep.bound_value * (1 + 1e-6):
            violations.append(BoundViolation(
                seed, "random", rep.name,
                f"ratio {ratio:.6g} > bound {rep.bound_value:.6g}"))
        rep = best_df_bound(inst.params, config.f.m, config.f.ell)
        ratio = empirical_ratio(costs["best"], costs["iga"])
        if ratio is not None and ratio > rep.bound_value * (1 + 1e-6):
            violations.append(BoundViolation(
                seed, "random", rep.name,
                f"ratio {ratio:.6g} > bound {rep.bound_value:.6g}"))
        gap = float(np.max(np.abs(cort0.actions - best.actions)))
        if gap > 1e-10:
            violations.append(BoundViolation(
                seed, "random", "cort_theta0_equals_best",
                f"max action gap {gap:.3e}"))

    # Asymptotic regime for the lower-bound family: no window memory,
    # vanishing switching weight, long horizon (start-up transients must not
    # mask the per-slot penalty).
    gap_params = ProblemParams(w=0, lambda1=1.0, lambda2=1e-8, d=1)
    for seed in range(batch.n_gap):
        rng = np.random.default_rng(10_000 + seed)
        errors = rng.uniform(1e-3, 0.5, size=2000)
        try:
            inst, stream = gen_prediction_gap_instance(
                [float(rng.uniform(0.5, 1.5))], errors, 1e-3, gap_params)
            iga = run_iga(inst, settings)
            pga = run_pga(inst, stream, settings)
        except SolverError as exc:
            failures += 1
            violations.append(BoundViolation(seed, "prediction_gap",
                                             "solver_failure", str(exc)))
            continue
        checked += 1
        lb = pga_df_lower_bound(inst.f.m, errors, 1e-3, inst.f,
                                inst.meta["direction"])
        ratio = empirical_ratio(pga.total_cost, iga.total_cost)
        if ratio is None or ratio < lb * (1 - 1e-6):
            violations.append(BoundViolation(
                10_000 + seed, "prediction_gap", "pga_df_lower",
                f"ratio {ratio} < bound {lb:.6g}"))
    if verbose:
        print(f"checked {checked} instances, "
              f"{len(violations)} violation(s), {failures} solver failure(s)")
    return violations, checked, failures
