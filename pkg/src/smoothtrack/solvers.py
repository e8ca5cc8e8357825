"""Strongly convex minimization: the per-slot argmin shared by every policy,
the full-horizon offline optimum, and brute-force oracles used by tests.

The per-slot objective for window sum ``h``, switching anchor ``z`` and
targets ``(tau, u)`` is

    phi(x) = ||(x + h)/(w+1) - tau||^2 + lambda1 * f(x - u) + lambda2 * ||x - z||^2

with the middle term dropped when no perturbation function is supplied.  For
quadratic ``f`` the objective is coordinate-separable, so the box-constrained
minimizer is the coordinate-wise clamp of the unconstrained closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import DimensionError, OracleError, SolverError
from .model import (Array, FunctionSpec, Instance, ProblemParams, RunResult,
                    _vec, trajectory_cost, window_sums)


@dataclass(frozen=True, eq=False)
class StepProblem:
    """One slot's minimization data.  ``f`` and ``u`` are both present or
    both absent; absent means the perturbation term is dropped."""

    params: ProblemParams
    h: Array
    z: Array
    tau: Array
    f: FunctionSpec | None = None
    u: Array | None = None

    def __post_init__(self):
        d = self.params.d
        object.__setattr__(self, "h", _vec(self.h, d, "h"))
        object.__setattr__(self, "z", _vec(self.z, d, "z"))
        object.__setattr__(self, "tau", _vec(self.tau, d, "tau"))
        if (self.f is None) != (self.u is None):
            raise ValueError("f and u must be supplied together")
        if self.u is not None:
            object.__setattr__(self, "u", _vec(self.u, d, "u"))


@dataclass(frozen=True)
class SolverSettings:
    grad_tol: float = 1e-10
    max_iters: int = 100_000
    step_rule: str = "fixed_inverse_smoothness"

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.step_rule not in ("fixed_inverse_smoothness", "backtracking"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")


DEFAULT_SETTINGS = SolverSettings()


def step_objective(problem: StepProblem, x: Array) -> Array:
    """phi(x); batch-aware over leading axes of ``x``."""
    p = problem.params
    wp1 = p.w + 1
    val = np.sum(((x + problem.h) / wp1 - problem.tau) ** 2, axis=-1)
    if problem.f is not None:
        val = val + p.lambda1 * problem.f.value(x - problem.u)
    return val + p.lambda2 * np.sum((x - problem.z) ** 2, axis=-1)


def step_gradient(problem: StepProblem, x: Array) -> Array:
    p = problem.params
    wp1 = p.w + 1
    g = (2.0 / wp1**2) * (x + problem.h - wp1 * problem.tau)
    if problem.f is not None:
        g = g + p.lambda1 * problem.f.grad(x - problem.u)
    return g + 2.0 * p.lambda2 * (x - problem.z)


def step_smoothness(problem: StepProblem) -> float:
    """Upper bound on the per-slot objective's curvature."""
    p = problem.params
    L = 2.0 / (p.w + 1) ** 2 + 2.0 * p.lambda2
    if problem.f is not None:
        L += p.lambda1 * problem.f.ell
    return L


def _closed_form(params: ProblemParams, kappa: float, h: Array, z: Array,
                 tau: Array, u: Array | None) -> Array:
    wp1 = params.w + 1
    a = 1.0 / (wp1 * wp1)
    num = a * (wp1 * tau - h) + params.lambda2 * z
    den = a + params.lambda2
    if kappa > 0.0:
        num = num + kappa * u
        den += kappa
    x = num / den
    if params.domain is not None:
        x = params.domain.clamp(x)
    return x


def per_step_argmin(problem: StepProblem,
                    settings: SolverSettings = DEFAULT_SETTINGS) -> Array:
    """Minimize the slot objective over the box (or all of R^d).

    Quadratic perturbations (and the no-perturbation form) use the exact
    closed form; anything else runs projected gradient descent with step
    1/L until the gradient-mapping norm falls below ``grad_tol``.
    """
    p = problem.params
    if problem.f is None:
        return _closed_form(p, 0.0, problem.h, problem.z, problem.tau, None)
    if problem.f.kind == "quadratic":
        kappa = p.lambda1 * problem.f.params["c"]
        return _closed_form(p, kappa, problem.h, problem.z, problem.tau, problem.u)

    L = step_smoothness(problem)
    x = problem.z.copy()
    if p.domain is not None:
        x = p.domain.clamp(x)
    step = 1.0 / L
    gm_norm = np.inf
    for it in range(settings.max_iters):
        g = step_gradient(problem, x)
        if settings.step_rule == "backtracking":
            step = _backtrack(problem, x, g, step * 2.0)
        x_new = x - step * g
        if p.domain is not None:
            x_new = p.domain.clamp(x_new)
        gm_norm = float(np.linalg.norm(x - x_new)) / step
        x = x_new
        if gm_norm <= settings.grad_tol:
            return x
    raise SolverError(
        f"per-slot solve did not reach grad_tol={settings.grad_tol:g} "
        f"within {settings.max_iters} iterations (last norm {gm_norm:.3e})",
        gradient_norm=gm_norm, iterations=settings.max_iters)


def _backtrack(problem: StepProblem, x: Array, g: Array, step: float) -> float:
    # Standard sufficient-decrease halving for the projected step.
    fx = float(step_objective(problem, x))
    for _ in range(60):
        x_new = x - step * g
        if problem.params.domain is not None:
            x_new = problem.params.domain.clamp(x_new)
        dx = x_new - x
        if float(step_objective(problem, x_new)) <= \
                fx + float(np.dot(g, dx)) + float(np.dot(dx, dx)) / (2 * step):
            return step
        step *= 0.5
    return step


def grid_search_step(problem: StepProblem, lo: float, hi: float,
                     resolution: float) -> tuple[Array, float]:
    """Exhaustive 1-D oracle: best grid point of the slot objective."""
    if problem.params.d != 1:
        raise OracleError("grid search oracle supports d=1 only")
    n = int(round((hi - lo) / resolution)) + 1
    grid = np.linspace(lo, hi, n)
    vals = step_objective(problem, grid[:, None])
    i = int(np.argmin(vals))
    return np.array([grid[i]]), float(vals[i])


# ---------------------------------------------------------------------------
# Offline optimum
# ---------------------------------------------------------------------------

def full_horizon_gradient(instance: Instance, X: Array) -> Array:
    """Gradient of the total cost with respect to the whole trajectory.

    The tracking term couples x_t to slots t..t+w; switching couples
    neighbours; the perturbation term is slot-local.
    """
    p = instance.params
    T, d = instance.T, p.d
    wp1 = p.w + 1
    S = X + window_sums(X, p.w)
    r = S / wp1 - instance.tau
    R = np.vstack([np.zeros((1, d)), np.cumsum(r, axis=0)])
    idx = np.minimum(np.arange(T) + p.w, T - 1)
    g = (2.0 / wp1) * (R[idx + 1] - R[np.arange(T)])
    if instance.f_overrides is None:
        g += p.lambda1 * instance.f.grad(X - instance.u)
    else:
        for t in range(T):
            g[t] += p.lambda1 * instance.function_at(t).grad(X[t] - instance.u[t])
    prev = np.vstack([np.zeros((1, d)), X[:-1]])
    g += 2.0 * p.lambda2 * (X - prev)
    g[:-1] -= 2.0 * p.lambda2 * (X[1:] - X[:-1])
    return g


def horizon_smoothness(instance: Instance) -> float:
    """Curvature bound for the full-horizon objective.

    Tracking contributes at most 2 (||M|| <= w+1 for the window-sum
    operator), the perturbation term lambda1*ell, and switching
    2*lambda2*lambda_max(D^T D) <= 8*lambda2.
    """
    p = instance.params
    ell = max((f.ell for f in (instance.f_overrides or [instance.f])),
              default=instance.f.ell)
    return 2.0 + p.lambda1 * ell + 8.0 * p.lambda2


def _offline_banded(instance: Instance) -> Array:
    """Exact direct solve for quadratic perturbation and no domain.

    Coordinates decouple, so one symmetric banded system covers all of them:
    H x = b with H = 2a M^T M + 2 kappa I + 2 lambda2 D^T D.
    """
    p = instance.params
    T, w = instance.T, p.w
    wp1 = w + 1
    a = 1.0 / (wp1 * wp1)
    kappa = p.lambda1 * instance.f.params["c"]
    bw = min(max(w, 1), T - 1)

    ab = np.zeros((bw + 1, T))
    for off in range(bw + 1):
        j = np.arange(off, T)
        i = j - off
        cnt = np.minimum(i + w, T - 1) - j + 1 if off <= w else np.zeros_like(j)
        cnt = np.maximum(cnt, 0)
        ab[bw - off, j] = 2.0 * a * cnt
    diag = ab[bw] + 2.0 * kappa + 4.0 * p.lambda2
    diag[-1] -= 2.0 * p.lambda2
    ab[bw] = diag
    if bw >= 1 and T >= 2:
        ab[bw - 1, 1:] += -2.0 * p.lambda2

    csum = np.vstack([np.zeros((1, p.d)), np.cumsum(instance.tau, axis=0)])
    upper = np.minimum(np.arange(T) + w, T - 1)
    mt_tau = csum[upper + 1] - csum[np.arange(T)]
    b = 2.0 * a * wp1 * mt_tau + 2.0 * kappa * instance.u
    return solveh_banded(ab, b, lower=False)


def offline_optimal(instance: Instance,
                    settings: SolverSettings = DEFAULT_SETTINGS) -> RunResult:
    """Hindsight-optimal trajectory over the whole horizon.

    Quadratic, unconstrained instances use a direct banded solve; otherwise
    projected gradient descent with fixed step 1/L runs until the
    gradient-mapping norm over the full trajectory reaches ``grad_tol``.
    """
    p = instance.params
    if (p.domain is None and instance.f_overrides is None
            and instance.f.kind == "quadratic"):
        X = _offline_banded(instance)
        return trajectory_cost(instance, X, algorithm="opt")

    L = horizon_smoothness(instance)
    step = 1.0 / L
    X = np.zeros((instance.T, p.d))
    if p.domain is not None:
        X = p.domain.clamp(X)
    gm_norm = np.inf
    for it in range(settings.max_iters):
        G = full_horizon_gradient(instance, X)
        X_new = X - step * G
        if p.domain is not None:
            X_new = p.domain.clamp(X_new)
        gm_norm = float(np.linalg.norm(X - X_new)) / step
        X = X_new
        if gm_norm <= settings.grad_tol:
            break
    else:
        raise SolverError(
            f"offline solve did not reach grad_tol={settings.grad_tol:g} within "
            f"{settings.max_iters} iterations (last norm {gm_norm:.3e}, "
            f"T={instance.T}, w={p.w})",
            gradient_norm=gm_norm, iterations=settings.max_iters)
    return trajectory_cost(instance, X, algorithm="opt")


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

_MAX_JOINT_POINTS = 20_000_000


def brute_force_optimal(instance: Instance, grid_resolution: float) -> RunResult:
    """Exhaustive search over the discretized domain grid, jointly over all
    slots.  Testing oracle: requires d = 1, T <= 5 and a bounded domain.

    For w <= 1 the slot costs couple only adjacent slots, so the grid optimum
    is found by exact dynamic programming over (previous action, action)
    pairs; the result equals full enumeration on the same grid.  Larger w
    falls back to explicit enumeration and is only feasible for tiny grids.
    """
    p = instance.params
    if p.d != 1:
        raise OracleError("brute force requires d=1")
    if instance.T > 5:
        raise OracleError("brute force requires T<=5")
    if p.domain is None or not p.domain.is_bounded():
        raise OracleError("brute force requires a bounded domain")
    lo, hi = float(p.domain.lower[0]), float(p.domain.upper[0])
    n = int(round((hi - lo) / grid_resolution)) + 1
    grid = np.linspace(lo, hi, n)

    if p.w <= 1:
        path = _grid_dp(instance, grid)
    else:
        if n ** instance.T > _MAX_JOINT_POINTS:
            raise OracleError(
                f"grid of {n} points over T={instance.T} slots with w={p.w} "
                "exceeds the enumeration budget")
        path = _grid_enumerate(instance, grid)
    return trajectory_cost(instance, path[:, None], algorithm="brute_force")


def _slot_cost_matrix(instance: Instance, t: int, prev: Array, cur: Array) -> Array:
    """Slot-t cost on the (prev, cur) grid product; valid for w <= 1."""
    p = instance.params
    wp1 = p.w + 1
    h = prev[:, None] if p.w == 1 else 0.0
    tr = ((cur[None, :] + h) / wp1 - instance.tau[t, 0]) ** 2
    adv = p.lambda1 * instance.function_at(t).value(
        (cur - instance.u[t, 0])[:, None])
    sw = p.lambda2 * (cur[None, :] - prev[:, None]) ** 2
    return tr + adv[None, :] + sw


def _grid_dp(instance: Instance, grid: Array) -> Array:
    T = instance.T
    zero = np.zeros(1)
    V = _slot_cost_matrix(instance, 0, zero, grid)[0]
    back = []
    for t in range(1, T):
        M = V[:, None] + _slot_cost_matrix(instance, t, grid, grid)
        back.append(np.argmin(M, axis=0))
        V = np.min(M, axis=0)
    j = int(np.argmin(V))
    path = [j]
    for bp in reversed(back):
        j = int(bp[j])
        path.append(j)
    path.reverse()
    return grid[np.array(path)]


def _grid_enumerate(instance: Instance, grid: Array) -> Array:
    T = instance.T
    mesh = np.meshgrid(*([grid] * T), indexing="ij")
    combos = np.stack([m.ravel() for m in mesh], axis=1)  # (n^T, T)
    p = instance.params
    wp1 = p.w + 1
    total = np.zeros(combos.shape[0])
    for t in range(T):
        h = combos[:, max(0, t - p.w):t].sum(axis=1)
        prev = combos[:, t - 1] if t > 0 else 0.0
        total += ((combos[:, t] + h) / wp1 - instance.tau[t, 0]) ** 2
        total += p.lambda1 * instance.function_at(t).value(
            (combos[:, t] - instance.u[t, 0])[:, None])
        total += p.lambda2 * (combos[:, t] - prev) ** 2
    return combos[int(np.argmin(total))]
