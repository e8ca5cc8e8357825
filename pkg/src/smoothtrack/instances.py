"""Instance construction: workload-trace ingestion with a slot-of-day target
schedule, synthetic generators, and the collinear prediction-gap family used
for the prediction-trust lower-bound checks.

Trace CSV schema: header ``slot,utilization``, slots strictly increasing,
utilization in [0, 1].  The hidden target is u_t = 1 - utilization_t (the
share left over by immediate-service demand); the trajectory target comes
from the schedule by slot of day.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import TraceFormatError
from .model import Array, FunctionSpec, Instance, ProblemParams, quadratic
from .predictors import PredictionStream

SLOTS_PER_DAY = 288  # five-minute slots


@dataclass(frozen=True)
class TauSchedule:
    """Trajectory-target level by slot of day.

    ``bands`` are (start_slot, end_slot, level) with end exclusive; they must
    tile [0, slots_per_day) without overlap.
    """

    bands: tuple[tuple[int, int, float], ...]
    slots_per_day: int = SLOTS_PER_DAY

    def __post_init__(self):
        bands = tuple(sorted((int(a), int(b), float(v)) for a, b, v in self.bands))
        cursor = 0
        for start, end, level in bands:
            if start != cursor or end <= start:
                raise ValueError(
                    f"bands must tile [0, {self.slots_per_day}) without "
                    f"overlap; got a band [{start}, {end})")
            if not 0.0 <= level <= 1.0:
                raise ValueError(f"band level {level} outside [0, 1]")
            cursor = end
        if cursor != self.slots_per_day:
            raise ValueError("bands do not cover the full day")
        object.__setattr__(self, "bands", bands)

    def level_at(self, slot: int) -> float:
        s = slot % self.slots_per_day
        for start, end, level in self.bands:
            if start <= s < end:
                return level
        raise AssertionError("unreachable: bands tile the day")

    def levels(self, slots: Array) -> Array:
        edges = np.array([b[0] for b in self.bands])
        vals = np.array([b[2] for b in self.bands])
        idx = np.searchsorted(edges, slots % self.slots_per_day, side="right") - 1
        return vals[idx]

    def shifted(self, delta: float) -> "TauSchedule":
        """Uniform level offset preserving the band structure."""
        return replace(self, bands=tuple(
            (a, b, v + delta) for a, b, v in self.bands))

    @property
    def daily_mean(self) -> float:
        return sum((b - a) * v for a, b, v in self.bands) / self.slots_per_day


# Off-peak 8PM-4AM -> 0.4, mid-peak 4AM-12PM -> 0.3, on-peak 12PM-8PM -> 0.2;
# daily mean 0.3.  Slot 0 is midnight.
DEFAULT_SCHEDULE = TauSchedule(bands=(
    (0, 48, 0.4),      # 12AM-4AM (off-peak tail)
    (48, 144, 0.3),    # 4AM-12PM
    (144, 240, 0.2),   # 12PM-8PM
    (240, 288, 0.4),   # 8PM-12AM
))


@dataclass(frozen=True)
class TraceRecord:
    slot: int
    utilization: float


def read_trace_csv(path) -> list[TraceRecord]:
    path = Path(path)
    records: list[TraceRecord] = []
    with path.open(newline="") as fh:
        lineno = 0
        header: list[str] | None = None
        for raw in csv.reader(fh):
            lineno += 1
            if not raw or raw[0].startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in raw]
                if header != ["slot", "utilization"]:
                    raise TraceFormatError(
                        "expected header 'slot,utilization'", line=lineno)
                continue
            if len(raw) != 2:
                raise TraceFormatError(f"expected 2 fields, got {len(raw)}",
                                       line=lineno)
            try:
                slot = int(raw[0])
                util = float(raw[1])
            except ValueError as exc:
                raise TraceFormatError(str(exc), line=lineno) from None
            if not 0.0 <= util <= 1.0:
                raise TraceFormatError(
                    f"utilization {util} outside [0, 1]", line=lineno)
            if records and slot <= records[-1].slot:
                raise TraceFormatError(
                    f"slots must be strictly increasing, got {slot}", line=lineno)
            records.append(TraceRecord(slot, util))
    if not records:
        raise TraceFormatError(f"{path}: no trace rows found")
    return records


def write_trace_csv(records, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "utilization"])
        for rec in records:
            writer.writerow([rec.slot, repr(float(rec.utilization))])


def instance_from_records(records, schedule: TauSchedule,
                          params: ProblemParams,
                          f: FunctionSpec | None = None) -> Instance:
    if params.d != 1:
        raise ValueError("trace instances are one-dimensional")
    slots = np.array([r.slot for r in records])
    util = np.array([r.utilization for r in records])
    u = (1.0 - util)[:, None]
    tau = schedule.levels(slots)[:, None]
    return Instance(tau=tau, u=u, f=f or quadratic(1.0), params=params,
                    meta={"source": "trace", "slots": slots})


def load_trace_csv(path, schedule: TauSchedule, params: ProblemParams,
                   f: FunctionSpec | None = None) -> Instance:
    """Build an instance from a utilization trace: u = 1 - utilization,
    tau from the schedule by slot of day."""
    return instance_from_records(read_trace_csv(path), schedule, params, f)


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomWalk:
    step_sigma: float = 0.05


@dataclass(frozen=True)
class PiecewiseConstant:
    segment_len: int = 24
    levels: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)


def _walk(rng, T, d, lo, hi, sigma):
    x = np.empty((T, d))
    x[0] = rng.uniform(lo, hi, size=d)
    steps = rng.normal(0.0, sigma, size=(T - 1, d)) if T > 1 else None
    for t in range(1, T):
        x[t] = x[t - 1] + steps[t - 1]
    return np.clip(x, lo, hi)


def _piecewise(rng, T, d, levels, seg):
    n_seg = (T + seg - 1) // seg
    choices = rng.choice(np.asarray(levels, dtype=np.float64), size=(n_seg, d))
    return np.repeat(choices, seg, axis=0)[:T]


def gen_random_instance(seed: int, T: int, params: ProblemParams,
                        dynamics=RandomWalk(),
                        f: FunctionSpec | None = None) -> Instance:
    """Seed-deterministic synthetic instance; targets stay inside the domain
    box ([0, 1] per coordinate when the instance is unconstrained)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    rng = np.random.default_rng(seed)
    if params.domain is not None:
        lo, hi = params.domain.lower, params.domain.upper
    else:
        lo, hi = np.zeros(params.d), np.ones(params.d)
    if isinstance(dynamics, RandomWalk):
        tau = _walk(rng, T, params.d, lo, hi, dynamics.step_sigma)
        u = _walk(rng, T, params.d, lo, hi, dynamics.step_sigma)
    elif isinstance(dynamics, PiecewiseConstant):
        # Levels are fractions of the per-coordinate box span.
        frac = dynamics.levels
        tau = lo + (hi - lo) * _piecewise(rng, T, params.d, frac,
                                          dynamics.segment_len)
        u = lo + (hi - lo) * _piecewise(rng, T, params.d, frac,
                                        dynamics.segment_len)
    else:
        raise ValueError(f"unknown dynamics {dynamics!r}")
    return Instance(tau=tau, u=u, f=f or quadratic(1.0), params=params,
                    meta={"source": "synthetic", "seed": seed})


# ---------------------------------------------------------------------------
# Prediction-gap lower-bound family
# ---------------------------------------------------------------------------

def gen_prediction_gap_instance(u0, errors, e_min: float,
                                params: ProblemParams,
                                f: FunctionSpec | None = None
                                ) -> tuple[Instance, PredictionStream]:
    """Collinear construction exhibiting the prediction-trust penalty.

    The hidden target is the constant u0; the trajectory target sits e_min
    beyond it along the u0 ray, and each slot's prediction overshoots by
    e_t >= e_min along the same ray.  Returns the instance together with the
    adversarial prediction stream.
    """
    u0 = np.asarray(u0, dtype=np.float64).reshape(-1)
    if u0.shape != (params.d,):
        raise ValueError(f"u0 must have shape ({params.d},)")
    norm = float(np.linalg.norm(u0))
    if norm == 0.0:
        raise ValueError("u0 must be nonzero")
    errors = np.asarray(errors, dtype=np.float64).reshape(-1)
    if e_min <= 0:
        raise ValueError("e_min must be positive")
    if np.any(errors < e_min - 1e-15):
        raise ValueError("e_min must not exceed any per-slot error")
    T = errors.shape[0]
    direction = u0 / norm
    u = np.tile(u0, (T, 1))
    tau = u + e_min * direction
    u_hat = u + errors[:, None] * direction
    instance = Instance(
        tau=tau, u=u, f=f or quadratic(1.0), params=params,
        meta={"source": "prediction_gap",
              "errors": errors, "e_min": float(e_min), "direction": direction})
    return instance, PredictionStream(u_hat, source="prediction_gap", oracle=True)


# ---------------------------------------------------------------------------
# Demo trace
# ---------------------------------------------------------------------------

def gen_demo_trace(days: int = 7, seed: int = 7, noise_sigma: float = 0.005,
                   slots_per_day: int = SLOTS_PER_DAY) -> list[TraceRecord]:
    """Diurnal synthetic utilization trace, deterministic given the seed.

    Demand peaks midday (the default schedule's on-peak period), so the
    leftover share 1 - utilization hovers a little above the target schedule
    and follows a damped version of its band swing with 45-minute ramps
    instead of square jumps.  On top sit a mild diurnal residual, a
    half-hourly cron-style load cycle, and Gaussian noise; everything is
    clipped to [0.02, 0.98].  This is the regime where hidden-target
    knowledge is worth real money to an online policy: the slow and periodic
    components are learnable and the fast component is what the informed
    baseline wins on."""
    rng = np.random.default_rng(seed)
    T = days * slots_per_day
    slots = np.arange(T)
    levels = DEFAULT_SCHEDULE.levels(np.arange(-slots_per_day,
                                               T + slots_per_day))
    kernel = np.bartlett(11)
    kernel /= kernel.sum()
    sched = np.convolve(levels, kernel, mode="same")[
        slots_per_day:slots_per_day + T]
    demand_share = 0.3 + 0.35 * (sched - 0.3)
    base = 1.0 - demand_share - 0.045
    phase = 2.0 * np.pi * ((slots % slots_per_day) - 192) / slots_per_day
    util = base + 0.04 * np.cos(phase)
    util += 0.035 * np.sin(2.0 * np.pi * slots / 6.0)  # half-hourly load cycle
    util += noise_sigma * rng.standard_normal(T)
    util = np.clip(util, 0.02, 0.98)
    return [TraceRecord(int(s), float(v)) for s, v in zip(slots, util)]
