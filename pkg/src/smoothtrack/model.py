"""Problem definition and cost evaluation for smoothed online target tracking.

An agent picks an action ``x_t`` in ``R^d`` each slot.  With ``h_t`` the sum
of its previous ``w`` actions and ``z = x_{t-1}``, the slot cost is

    ||(x_t + h_t)/(w+1) - tau_t||^2          tracking term
    + lambda1 * f(x_t - u_t)                 perturbation term
    + lambda2 * ||x_t - x_{t-1}||^2          switching term

where ``tau_t`` is the trajectory target (revealed before acting) and ``u_t``
the hidden target (revealed only after acting).  Actions and hidden targets
are zero for all slots t <= 0.

Evaluation here is total: no domain constraint is applied, so arbitrary
candidate trajectories (e.g. from brute-force oracles) can be scored.  Only
the solvers enforce the action box.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError

Array = np.ndarray


def _vec(x, d: int, name: str) -> Array:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.shape != (d,):
        raise DimensionError(f"{name}: expected shape ({d},), got {v.shape}")
    return v


# ---------------------------------------------------------------------------
# Domain box
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned action domain with per-coordinate bounds."""

    lower: Array
    upper: Array

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64).reshape(-1)
        hi = np.asarray(self.upper, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise DimensionError("box bounds must have matching shapes")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def uniform(cls, lo: float, hi: float, d: int) -> "Box":
        return cls(np.full(d, lo), np.full(d, hi))

    @property
    def d(self) -> int:
        return self.lower.shape[0]

    def clamp(self, x: Array) -> Array:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: Array, tol: float = 1e-9) -> bool:
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def is_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))


# ---------------------------------------------------------------------------
# Perturbation functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """A perturbation function with curvature constants.

    ``value`` and ``grad`` are batch-aware: they accept arrays of shape
    ``(..., d)`` and return shapes ``(...)`` and ``(..., d)``.  The function
    must be nonnegative with minimum 0 at the origin, ``m``-strongly convex
    and ``ell``-smooth.
    """

    kind: str
    m: float
    ell: float
    value: Callable[[Array], Array]
    grad: Callable[[Array], Array]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.m > 0 and self.ell > 0):
            raise ValueError("curvature constants must be positive")
        if self.m > self.ell + 1e-15:
            raise ValueError("strong-convexity constant exceeds smoothness constant")


def _make_quadratic(c: float = 1.0) -> FunctionSpec:
    if c <= 0:
        raise ValueError("quadratic coefficient must be positive")
    return FunctionSpec(
        kind="quadratic",
        m=2.0 * c,
        ell=2.0 * c,
        value=lambda y: c * np.sum(np.square(y), axis=-1),
        grad=lambda y: 2.0 * c * np.asarray(y, dtype=np.float64),
        params={"c": float(c)},
    )


_FUNCTION_FACTORIES: dict[str, Callable[..., FunctionSpec]] = {
    "quadratic": _make_quadratic,
}


def register_function_kind(kind: str, factory: Callable[..., FunctionSpec]) -> None:
    """Extend the registry with a new perturbation-function family."""
    _FUNCTION_FACTORIES[kind] = factory


def make_function(kind: str, **kwargs) -> FunctionSpec:
    try:
        factory = _FUNCTION_FACTORIES[kind]
    except KeyError:
        raise ValueError(f"unknown function kind {kind!r}; "
                         f"registered: {sorted(_FUNCTION_FACTORIES)}") from None
    return factory(**kwargs)


def quadratic(c: float = 1.0) -> FunctionSpec:
    return make_function("quadratic", c=c)


def check_function_assumptions(f: FunctionSpec, d: int, rng: np.random.Generator,
                               trials: int = 100, scale: float = 2.0,
                               tol: float = 1e-9) -> None:
    """Randomized check of the structural assumptions on ``f``.

    Verifies f(0) = 0, nonnegativity, the m-strong-convexity lower bound and
    the ell-smoothness upper bound on sampled point pairs.  Raises
    AssertionError on violation; used by tests and instance validation.
    """
    zero = np.zeros(d)
    if abs(float(f.value(zero))) > tol:
        raise AssertionError("f(0) != 0")
    for _ in range(trials):
        x = rng.uniform(-scale, scale, size=d)
        y = rng.uniform(-scale, scale, size=d)
        fx, fy = float(f.value(x)), float(f.value(y))
        if fx < -tol:
            raise AssertionError("f takes a negative value")
        gap = fy - fx - float(np.dot(f.grad(x), y - x))
        sq = float(np.sum((y - x) ** 2))
        if gap < f.m / 2.0 * sq - tol:
            raise AssertionError("strong-convexity lower bound violated")
        if gap > f.ell / 2.0 * sq + tol:
            raise AssertionError("smoothness upper bound violated")


# ---------------------------------------------------------------------------
# Problem parameters and instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProblemParams:
    """Static problem parameters: window length, cost weights, dimension,
    optional action box."""

    w: int
    lambda1: float
    lambda2: float
    d: int = 1
    domain: Box | None = None

    def __post_init__(self):
        if self.w < 0 or int(self.w) != self.w:
            raise ValueError("window length w must be a nonnegative integer")
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError("lambda1 and lambda2 must be positive")
        if self.d < 1:
            raise ValueError("dimension d must be at least 1")
        object.__setattr__(self, "w", int(self.w))
        if self.domain is not None and self.domain.d != self.d:
            raise DimensionError(
                f"domain has dimension {self.domain.d}, params have d={self.d}")

    def replace(self, **changes) -> "ProblemParams":
        from dataclasses import replace as _r
        return _r(self, **changes)


@dataclass(frozen=True, eq=False)
class Instance:
    """One full problem instance: targets for every slot plus parameters.

    ``tau`` and ``u`` have shape (T, d).  ``f`` applies to every slot unless
    ``f_overrides`` supplies one spec per slot.  ``meta`` carries generator
    provenance (e.g. the error sequence of the prediction-gap family).
    """

    tau: Array
    u: Array
    f: FunctionSpec
    params: ProblemParams
    f_overrides: Sequence[FunctionSpec] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        tau = np.atleast_2d(np.asarray(self.tau, dtype=np.float64))
        u = np.atleast_2d(np.asarray(self.u, dtype=np.float64))
        if tau.shape != u.shape:
            raise DimensionError(
                f"tau shape {tau.shape} and u shape {u.shape} differ")
        if tau.ndim != 2 or tau.shape[1] != self.params.d:
            raise DimensionError(
                f"targets must have shape (T, {self.params.d}), got {tau.shape}")
        if tau.shape[0] < 1:
            raise ValueError("horizon must be at least 1")
        if self.f_overrides is not None and len(self.f_overrides) != tau.shape[0]:
            raise DimensionError("f_overrides must supply one spec per slot")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "u", u)

    @property
    def T(self) -> int:
        return self.tau.shape[0]

    @property
    def d(self) -> int:
        return self.params.d

    def function_at(self, t: int) -> FunctionSpec:
        """Perturbation function for 0-based slot ``t``."""
        if self.f_overrides is not None:
            return self.f_overrides[t]
        return self.f


# ---------------------------------------------------------------------------
# History buffer
# ---------------------------------------------------------------------------

class HistoryBuffer:
    """The last ``w`` actions (oldest first) plus the previous action.

    The window always holds exactly ``w`` vectors; before enough actions have
    been taken it is padded with zeros, matching the zero pre-history.
    """

    __slots__ = ("w", "d", "_window", "prev")

    def __init__(self, w: int, d: int):
        self.w = w
        self.d = d
        self._window: deque = deque((np.zeros(d) for _ in range(w)), maxlen=w or None)
        if w == 0:
            self._window = deque(maxlen=0)
        self.prev = np.zeros(d)

    @property
    def window(self) -> list:
        return list(self._window)

    def push(self, x: Array) -> None:
        x = _vec(x, self.d, "action")
        if self.w > 0:
            self._window.append(x)
        self.prev = x

    def sum(self) -> Array:
        if self.w == 0:
            return np.zeros(self.d)
        return np.sum(self._window, axis=0)


def history_sum(buffer: HistoryBuffer) -> Array:
    """Sum of the stored window; the zero vector when w = 0."""
    return buffer.sum()


# ---------------------------------------------------------------------------
# Cost evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostBreakdown:
    tracking: float
    adversarial: float
    switching: float
    total: float

    @classmethod
    def from_terms(cls, tracking: float, adversarial: float,
                   switching: float) -> "CostBreakdown":
        return cls(tracking, adversarial, switching,
                   tracking + adversarial + switching)


@dataclass(eq=False)
class RunResult:
    """Actions and per-slot cost terms of one algorithm on one instance."""

    algorithm: str
    actions: Array
    tracking: Array
    adversarial: Array
    switching: Array
    extras: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.actions.shape[0]

    @property
    def step_totals(self) -> Array:
        return self.tracking + self.adversarial + self.switching

    @property
    def per_step(self) -> list[CostBreakdown]:
        return [CostBreakdown.from_terms(float(a), float(b), float(c))
                for a, b, c in zip(self.tracking, self.adversarial, self.switching)]

    @property
    def total(self) -> CostBreakdown:
        # np.sum is pairwise, which keeps accumulation error negligible for
        # any horizon this library targets.
        return CostBreakdown(
            float(np.sum(self.tracking)),
            float(np.sum(self.adversarial)),
            float(np.sum(self.switching)),
            float(np.sum(self.tracking) + np.sum(self.adversarial)
                  + np.sum(self.switching)),
        )

    @property
    def total_cost(self) -> float:
        return self.total.total


def step_cost(params: ProblemParams, f: FunctionSpec, x, h, x_prev, tau,
              u) -> CostBreakdown:
    """Cost of one slot given the window sum ``h`` and previous action."""
    d = params.d
    x = _vec(x, d, "x")
    h = _vec(h, d, "h")
    x_prev = _vec(x_prev, d, "x_prev")
    tau = _vec(tau, d, "tau")
    u = _vec(u, d, "u")
    wp1 = params.w + 1
    tracking = float(np.sum(((x + h) / wp1 - tau) ** 2))
    adversarial = params.lambda1 * float(f.value(x - u))
    switching = params.lambda2 * float(np.sum((x - x_prev) ** 2))
    return CostBreakdown.from_terms(tracking, adversarial, switching)


def window_sums(actions: Array, w: int) -> Array:
    """h_t = sum of the w actions before slot t, zero-padded at the start."""
    T, d = actions.shape
    if w == 0:
        return np.zeros((T, d))
    csum = np.vstack([np.zeros((1, d)), np.cumsum(actions, axis=0)])
    start = np.maximum(np.arange(T) - w, 0)
    return csum[np.arange(T)] - csum[start]


def trajectory_cost(instance: Instance, actions, algorithm: str = "eval") -> RunResult:
    """Evaluate a full action sequence against an instance.

    Domain membership is not enforced; evaluation is defined for any
    trajectory of the right shape.
    """
    X = np.atleast_2d(np.asarray(actions, dtype=np.float64))
    if X.ndim == 2 and X.shape == (instance.d, instance.T) and instance.d != instance.T:
        raise DimensionError(f"actions must have shape ({instance.T}, {instance.d})")
    if X.shape != (instance.T, instance.d):
        raise DimensionError(
            f"actions must have shape ({instance.T}, {instance.d}), got {X.shape}")
    p = instance.params
    wp1 = p.w + 1
    H = window_sums(X, p.w)
    prev = np.vstack([np.zeros((1, p.d)), X[:-1]])
    tracking = np.sum(((X + H) / wp1 - instance.tau) ** 2, axis=1)
    if instance.f_overrides is None:
        adversarial = p.lambda1 * np.asarray(instance.f.value(X - instance.u),
                                             dtype=np.float64)
    else:
        adversarial = p.lambda1 * np.array(
            [float(instance.function_at(t).value(X[t] - instance.u[t]))
             for t in range(instance.T)])
    switching = p.lambda2 * np.sum((X - prev) ** 2, axis=1)
    return RunResult(algorithm=algorithm, actions=X, tracking=tracking,
                     adversarial=adversarial, switching=switching)
