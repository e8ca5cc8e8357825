"""Pure NumPy fallback for the per-slot policy recursions.

These chains cover the quadratic-perturbation fast path shared by all
policies: each slot solves the separable closed form

    x = clamp( (a*((w+1)*tau - h) + kappa*target + lambda2*z) / (a + kappa + lambda2) )

with a = 1/(w+1)^2, h the sum of the relevant history window and z the
previous action of that history.  The compiled extension implements the same
routines; see smoothtrack.kernels for selection.
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "python"


class _Hist:
    """Fixed-size action window with running position."""

    __slots__ = ("w", "buf", "pos", "prev")

    def __init__(self, w: int, d: int):
        self.w = w
        self.buf = np.zeros((w, d))
        self.pos = 0
        self.prev = np.zeros(d)

    def sum(self):
        if self.w == 0:
            return 0.0
        return self.buf.sum(axis=0)

    def push(self, x):
        if self.w > 0:
            self.buf[self.pos] = x
            self.pos = (self.pos + 1) % self.w
        self.prev = x


def _solve(a, wp1, kappa, lam2, tau_t, h, z, target, lo, hi):
    x = (a * (wp1 * tau_t - h) + kappa * target + lam2 * z) / (a + kappa + lam2)
    np.clip(x, lo, hi, out=x)
    return x


def greedy_chain(tau, target, kappa, w, lam2, lo, hi):
    """Greedy recursion on the policy's own history.

    kappa > 0 pulls each slot toward target[t] (informed / prediction-based
    variants); kappa = 0 drops that term (blind greedy).
    """
    T, d = tau.shape
    wp1 = w + 1
    a = 1.0 / (wp1 * wp1)
    X = np.empty((T, d))
    hist = _Hist(w, d)
    zero = np.zeros(d)
    for t in range(T):
        tgt = target[t] if kappa > 0.0 else zero
        x = _solve(a, wp1, kappa, lam2, tau[t], hist.sum(), hist.prev, tgt, lo, hi)
        X[t] = x
        hist.push(x)
    return X


def best_chain(tau, u, kappa, w, lam2, lo, hi):
    """Blind policy that replays the informed chain from revealed targets.

    At slot t the informed action for slot t-1 is reproducible (u[t-1] is
    known), so the blind action is the kappa=0 solve on the informed
    history.  Returns (blind actions, informed actions).
    """
    T, d = tau.shape
    wp1 = w + 1
    a = 1.0 / (wp1 * wp1)
    Xb = np.empty((T, d))
    Xi = np.empty((T, d))
    hist = _Hist(w, d)
    zero = np.zeros(d)
    for t in range(T):
        h = hist.sum()
        z = hist.prev
        Xb[t] = _solve(a, wp1, 0.0, lam2, tau[t], h, z, zero, lo, hi)
        xi = _solve(a, wp1, kappa, lam2, tau[t], h, z, u[t], lo, hi)
        Xi[t] = xi
        hist.push(xi)
    return Xb, Xi


def cort_chain(tau, u, uhat, theta, kappa, w, lam2, lo, hi):
    """Trust-clipped prediction chain on the informed history.

    Per slot: take the blind action x, pull the prediction into the ball of
    radius theta*D around x, solve with the clipped target, then grow the
    trust radius from the realized gap:

        D_{t+1}^2 = D_t^2 + ||u_t - x||^2 - ||u~ - x||^2 / theta^2

    (the subtracted term is 0 at theta = 0, where the clip pins u~ to x).
    Returns (actions, blind actions, informed actions, clipped targets,
    D^2 series of length T+1, clip-active flags).
    """
    T, d = tau.shape
    wp1 = w + 1
    a = 1.0 / (wp1 * wp1)
    X = np.empty((T, d))
    Xb = np.empty((T, d))
    Xi = np.empty((T, d))
    Ut = np.empty((T, d))
    d_sq = np.zeros(T + 1)
    clipped = np.zeros(T, dtype=bool)
    hist = _Hist(w, d)
    zero = np.zeros(d)
    for t in range(T):
        h = hist.sum()
        z = hist.prev
        xb = _solve(a, wp1, 0.0, lam2, tau[t], h, z, zero, lo, hi)
        Xb[t] = xb
        gap = uhat[t] - xb
        dist = float(np.sqrt(np.dot(gap, gap)))
        radius = theta * float(np.sqrt(d_sq[t]))
        if dist >= radius:
            clipped[t] = True
            ut = xb + (radius / dist) * gap if dist > 0.0 else xb.copy()
        else:
            ut = uhat[t].copy()
        Ut[t] = ut
        X[t] = _solve(a, wp1, kappa, lam2, tau[t], h, z, ut, lo, hi)
        err = u[t] - xb
        sub = 0.0
        if theta > 0.0:
            pull = ut - xb
            sub = float(np.dot(pull, pull)) / (theta * theta)
        d_sq[t + 1] = d_sq[t] + float(np.dot(err, err)) - sub
        xi = _solve(a, wp1, kappa, lam2, tau[t], h, z, u[t], lo, hi)
        Xi[t] = xi
        hist.push(xi)
    return X, Xb, Xi, Ut, d_sq, clipped
