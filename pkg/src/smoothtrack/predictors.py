"""Prediction streams of the hidden target, for the prediction-based and
trust-clipped policies.

CSV schema: header ``slot,uhat_0[,uhat_1,...]``, one row per slot t=1..T,
decimal floats.  Lines starting with ``#`` are comments (writers may record
provenance such as a seed there).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, TraceFormatError
from .model import Array, Instance
from .policies import run_best
from .solvers import DEFAULT_SETTINGS, SolverSettings


@dataclass(frozen=True, eq=False)
class PredictionStream:
    """A sequence of predicted hidden targets, one per slot.

    ``oracle`` flags streams built from information an online predictor
    could not have (the reflected stress-test stream); they are precomputed
    whole and never produced inside the causal loop.
    """

    u_hat: Array
    source: str
    oracle: bool = False

    def __post_init__(self):
        u_hat = np.atleast_2d(np.asarray(self.u_hat, dtype=np.float64))
        object.__setattr__(self, "u_hat", u_hat)

    @property
    def T(self) -> int:
        return self.u_hat.shape[0]

    def validate_against(self, instance: Instance) -> None:
        if self.u_hat.shape != (instance.T, instance.d):
            raise DimensionError(
                f"prediction stream {self.source!r} has shape "
                f"{self.u_hat.shape}, instance needs ({instance.T}, {instance.d})")


def perfect_predictor(instance: Instance) -> PredictionStream:
    """u_hat = u exactly."""
    return PredictionStream(instance.u.copy(), source="perfect")


def pessimistic_predictor(instance: Instance,
                          settings: SolverSettings = DEFAULT_SETTINGS
                          ) -> PredictionStream:
    """Reflects the true target across the blind policy's action:
    u_hat_t = 2 x_t - u_t.  An adversarial oracle stream for stress tests;
    the prediction error is exactly twice the blind action's gap."""
    best = run_best(instance, settings)
    return PredictionStream(2.0 * best.actions - instance.u,
                            source="pessimistic", oracle=True)


def persistence_predictor(instance: Instance, lag: int = 1) -> PredictionStream:
    """u_hat_t = u_{t-lag}; zero for t <= lag.  Causal."""
    if lag < 1:
        raise ValueError("lag must be at least 1")
    u_hat = np.zeros_like(instance.u)
    if lag < instance.T:
        u_hat[lag:] = instance.u[:-lag]
    return PredictionStream(u_hat, source=f"persistence({lag})")


def moving_average_predictor(instance: Instance, window: int = 1
                             ) -> PredictionStream:
    """u_hat_t = mean of the last ``window`` revealed targets, zero-padded.
    Causal; window=1 coincides with persistence at lag 1."""
    if window < 1:
        raise ValueError("window must be at least 1")
    T, d = instance.u.shape
    csum = np.vstack([np.zeros((1, d)), np.cumsum(instance.u, axis=0)])
    u_hat = np.zeros_like(instance.u)
    for t in range(1, T):
        start = max(0, t - window)
        u_hat[t] = (csum[t] - csum[start]) / window
    return PredictionStream(u_hat, source=f"moving_average({window})")


def file_predictor(path) -> PredictionStream:
    """Read a stream from the predictions CSV; shape is validated against an
    instance at use time (``validate_against``)."""
    path = Path(path)
    rows: list[list[float]] = []
    with path.open(newline="") as fh:
        lineno = 0
        header: list[str] | None = None
        for raw in csv.reader(fh):
            lineno += 1
            if not raw or raw[0].startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in raw]
                if header[:1] != ["slot"] or len(header) < 2 or \
                        any(not c.startswith("uhat_") for c in header[1:]):
                    raise TraceFormatError(
                        "expected header 'slot,uhat_0[,uhat_1,...]'", line=lineno)
                continue
            if len(raw) != len(header):
                raise TraceFormatError(
                    f"expected {len(header)} fields, got {len(raw)}", line=lineno)
            try:
                slot = int(raw[0])
                vals = [float(v) for v in raw[1:]]
            except ValueError as exc:
                raise TraceFormatError(str(exc), line=lineno) from None
            if slot != len(rows) + 1:
                raise TraceFormatError(
                    f"slots must run 1..T in order, got {slot}", line=lineno)
            rows.append(vals)
    if header is None or not rows:
        raise TraceFormatError(f"{path}: no prediction rows found")
    return PredictionStream(np.asarray(rows), source=f"file({path.name})")


def write_predictions_csv(stream, path, comments: list[str] | None = None) -> None:
    u_hat = np.atleast_2d(np.asarray(getattr(stream, "u_hat", stream),
                                     dtype=np.float64))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["slot"] + [f"uhat_{j}" for j in range(u_hat.shape[1])])
        for t in range(u_hat.shape[0]):
            writer.writerow([t + 1] + [repr(float(v)) for v in u_hat[t]])
