# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of smoothtrack._chains_py; same routines, C loops.

The per-slot recursions are sequential in t and dominate simulation time for
long horizons, so they are the one hot spot worth compiling."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

IMPLEMENTATION = "compiled"


cdef inline void _solve(double a, double wp1, double kappa, double lam2,
                        double[:] tau_t, double[:] h, double[:] z,
                        double[:] target, double[:] lo, double[:] hi,
                        double[:] out) noexcept nogil:
    cdef Py_ssize_t j
    cdef double den = a + kappa + lam2
    cdef double v
    for j in range(tau_t.shape[0]):
        v = (a * (wp1 * tau_t[j] - h[j]) + kappa * target[j] + lam2 * z[j]) / den
        if v < lo[j]:
            v = lo[j]
        elif v > hi[j]:
            v = hi[j]
        out[j] = v


cdef inline void _hist_sum(double[:, :] buf, Py_ssize_t w, double[:] out) noexcept nogil:
    cdef Py_ssize_t i, j
    for j in range(out.shape[0]):
        out[j] = 0.0
    for i in range(w):
        for j in range(out.shape[0]):
            out[j] += buf[i, j]


cdef inline void _push(double[:, :] buf, Py_ssize_t w, Py_ssize_t* pos,
                       double[:] prev, double[:] x) noexcept nogil:
    cdef Py_ssize_t j
    if w > 0:
        for j in range(x.shape[0]):
            buf[pos[0], j] = x[j]
        pos[0] = (pos[0] + 1) % w
    for j in range(x.shape[0]):
        prev[j] = x[j]


def greedy_chain(double[:, :] tau, double[:, :] target, double kappa,
                 int w, double lam2, double[:] lo, double[:] hi):
    cdef Py_ssize_t T = tau.shape[0]
    cdef Py_ssize_t d = tau.shape[1]
    cdef double wp1 = w + 1.0
    cdef double a = 1.0 / (wp1 * wp1)
    X_arr = np.empty((T, d))
    cdef double[:, :] X = X_arr
    buf_arr = np.zeros((max(w, 1), d))
    cdef double[:, :] buf = buf_arr
    prev_arr = np.zeros(d)
    cdef double[:] prev = prev_arr
    h_arr = np.zeros(d)
    cdef double[:] h = h_arr
    zero_arr = np.zeros(d)
    cdef double[:] zero = zero_arr
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t t
    with nogil:
        for t in range(T):
            _hist_sum(buf, w, h)
            if kappa > 0.0:
                _solve(a, wp1, kappa, lam2, tau[t], h, prev, target[t], lo, hi, X[t])
            else:
                _solve(a, wp1, 0.0, lam2, tau[t], h, prev, zero, lo, hi, X[t])
            _push(buf, w, &pos, prev, X[t])
    return X_arr


def best_chain(double[:, :] tau, double[:, :] u, double kappa,
               int w, double lam2, double[:] lo, double[:] hi):
    cdef Py_ssize_t T = tau.shape[0]
    cdef Py_ssize_t d = tau.shape[1]
    cdef double wp1 = w + 1.0
    cdef double a = 1.0 / (wp1 * wp1)
    Xb_arr = np.empty((T, d))
    Xi_arr = np.empty((T, d))
    cdef double[:, :] Xb = Xb_arr
    cdef double[:, :] Xi = Xi_arr
    buf_arr = np.zeros((max(w, 1), d))
    cdef double[:, :] buf = buf_arr
    prev_arr = np.zeros(d)
    cdef double[:] prev = prev_arr
    h_arr = np.zeros(d)
    cdef double[:] h = h_arr
    zero_arr = np.zeros(d)
    cdef double[:] zero = zero_arr
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t t
    with nogil:
        for t in range(T):
            _hist_sum(buf, w, h)
            _solve(a, wp1, 0.0, lam2, tau[t], h, prev, zero, lo, hi, Xb[t])
            _solve(a, wp1, kappa, lam2, tau[t], h, prev, u[t], lo, hi, Xi[t])
            _push(buf, w, &pos, prev, Xi[t])
    return Xb_arr, Xi_arr


def cort_chain(double[:, :] tau, double[:, :] u, double[:, :] uhat,
               double theta, double kappa, int w, double lam2,
               double[:] lo, double[:] hi):
    cdef Py_ssize_t T = tau.shape[0]
    cdef Py_ssize_t d = tau.shape[1]
    cdef double wp1 = w + 1.0
    cdef double a = 1.0 / (wp1 * wp1)
    X_arr = np.empty((T, d))
    Xb_arr = np.empty((T, d))
    Xi_arr = np.empty((T, d))
    Ut_arr = np.empty((T, d))
    dsq_arr = np.zeros(T + 1)
    clip_arr = np.zeros(T, dtype=np.uint8)
    cdef double[:, :] X = X_arr
    cdef double[:, :] Xb = Xb_arr
    cdef double[:, :] Xi = Xi_arr
    cdef double[:, :] Ut = Ut_arr
    cdef double[:] dsq = dsq_arr
    cdef unsigned char[:] clip = clip_arr
    buf_arr = np.zeros((max(w, 1), d))
    cdef double[:, :] buf = buf_arr
    prev_arr = np.zeros(d)
    cdef double[:] prev = prev_arr
    h_arr = np.zeros(d)
    cdef double[:] h = h_arr
    zero_arr = np.zeros(d)
    cdef double[:] zero = zero_arr
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t t, j
    cdef double dist, radius, scale, err, sub, acc
    with nogil:
        for t in range(T):
            _hist_sum(buf, w, h)
            _solve(a, wp1, 0.0, lam2, tau[t], h, prev, zero, lo, hi, Xb[t])
            acc = 0.0
            for j in range(d):
                acc += (uhat[t, j] - Xb[t, j]) * (uhat[t, j] - Xb[t, j])
            dist = sqrt(acc)
            radius = theta * sqrt(dsq[t])
            if dist >= radius:
                clip[t] = 1
                scale = radius / dist if dist > 0.0 else 0.0
                for j in range(d):
                    Ut[t, j] = Xb[t, j] + scale * (uhat[t, j] - Xb[t, j])
            else:
                for j in range(d):
                    Ut[t, j] = uhat[t, j]
            _solve(a, wp1, kappa, lam2, tau[t], h, prev, Ut[t], lo, hi, X[t])
            acc = 0.0
            for j in range(d):
                err = u[t, j] - Xb[t, j]
                acc += err * err
            sub = 0.0
            if theta > 0.0:
                for j in range(d):
                    err = Ut[t, j] - Xb[t, j]
                    sub += err * err
                sub /= theta * theta
            dsq[t + 1] = dsq[t] + acc - sub
            _solve(a, wp1, kappa, lam2, tau[t], h, prev, u[t], lo, hi, Xi[t])
            _push(buf, w, &pos, prev, Xi[t])
    return X_arr, Xb_arr, Xi_arr, Ut_arr, dsq_arr, clip_arr.astype(bool)
