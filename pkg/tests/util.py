"""Shared randomized checks used by both the unit tests and the acceptance
suite (which runs them at full trial counts)."""

import numpy as np

from smoothtrack import (Box, ProblemParams, StepProblem, eta, eta2,
                         per_step_argmin, quadratic, step_objective)


def random_step_problem(rng, with_box=False, d=1):
    """A random 1-D (by default) quadratic slot problem whose minimizer stays
    well inside [-2, 2]."""
    w = int(rng.integers(0, 6))
    params = ProblemParams(
        w=w,
        lambda1=float(rng.uniform(0.2, 3.0)),
        lambda2=float(rng.uniform(0.01, 1.0)),
        d=d,
        domain=Box.uniform(-2.0, 2.0, d) if with_box else None,
    )
    f = quadratic(float(rng.uniform(0.3, 2.0)))
    vec = lambda: rng.uniform(-0.8, 0.8, size=d)
    h = rng.uniform(-0.8, 0.8, size=d) * (w if w else 1)
    return StepProblem(params=params, h=h, z=vec(), tau=vec(), f=f, u=vec())


def check_window_bound(rng, trials=100, rel_tol=1e-9, T=40, d=2, w_max=8):
    """sum_t ||sum_{i=1..w}(y_{t-i}-x_{t-i})||^2 <= w^2 sum_t ||y_t-x_t||^2."""
    for _ in range(trials):
        w = int(rng.integers(0, w_max + 1))
        x = rng.normal(size=(T, d))
        y = rng.normal(size=(T, d))
        diff = y - x
        padded = np.vstack([np.zeros((w, d)), diff])
        lhs = 0.0
        for t in range(T):
            lhs += float(np.sum(padded[t:t + w].sum(axis=0) ** 2))
        rhs = w * w * float(np.sum(diff ** 2))
        assert lhs <= rhs * (1.0 + rel_tol) + 1e-12, (w, lhs, rhs)


def check_lipschitz_stability(rng, trials=100, tol=1e-8):
    """Minimizer stability in (u, h): the shift is at most
    (1/eta) * [lambda1*ell*||du|| + (2/(w+1)^2)*||dh||].

    The history coefficient is 2/(w+1)^2, the constant the gradient
    comparison actually yields (tight for quadratics).
    """
    for _ in range(trials):
        d = int(rng.integers(1, 4))
        prob = random_step_problem(rng, d=d)
        p, f = prob.params, prob.f
        du = rng.normal(size=d) * rng.uniform(0, 1.0)
        dh = rng.normal(size=d) * rng.uniform(0, 1.0)
        x1 = per_step_argmin(prob)
        prob2 = StepProblem(params=p, h=prob.h + dh, z=prob.z, tau=prob.tau,
                            f=f, u=prob.u + du)
        x2 = per_step_argmin(prob2)
        e = eta(p, f.m)
        bound = (p.lambda1 * f.ell * np.linalg.norm(du)
                 + 2.0 / (p.w + 1) ** 2 * np.linalg.norm(dh)) / e
        assert np.linalg.norm(x2 - x1) <= bound + tol


def check_target_value_convexity(rng, trials=100, tol=1e-8):
    """g(u) = min_x phi(x; u) satisfies the eta2 strong-convexity inequality
    g(c u1 + (1-c) u2) <= c g(u1) + (1-c) g(u2) - (eta2/2) c (1-c) ||u1-u2||^2."""
    for _ in range(trials):
        d = int(rng.integers(1, 4))
        prob = random_step_problem(rng, d=d)
        p, f = prob.params, prob.f

        def g(u):
            q = StepProblem(params=p, h=prob.h, z=prob.z, tau=prob.tau, f=f, u=u)
            return float(step_objective(q, per_step_argmin(q)))

        u1 = rng.uniform(-1, 1, size=d)
        u2 = rng.uniform(-1, 1, size=d)
        c = float(rng.uniform(0.05, 0.95))
        lhs = g(c * u1 + (1 - c) * u2)
        rhs = (c * g(u1) + (1 - c) * g(u2)
               - eta2(p, f.m) / 2.0 * c * (1 - c) * float(np.sum((u1 - u2) ** 2)))
        assert lhs <= rhs + tol
