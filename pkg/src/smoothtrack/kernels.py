"""Kernel selection: compiled extension when importable, NumPy fallback
otherwise.  Set SMOOTHTRACK_PURE=1 to force the fallback."""

from __future__ import annotations

import os

import numpy as np

from . import _chains_py

if os.environ.get("SMOOTHTRACK_PURE", "") not in ("", "0"):
    _impl = _chains_py
else:
    try:
        from . import _chains as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _chains_py

IMPLEMENTATION: str = _impl.IMPLEMENTATION

greedy_chain = _impl.greedy_chain
best_chain = _impl.best_chain
cort_chain = _impl.cort_chain


def available_implementations() -> dict:
    """Map of implementation name to module, for benchmarks and tests."""
    impls = {"python": _chains_py}
    try:
        from . import _chains
        impls["compiled"] = _chains
    except ImportError:
        pass
    return impls


def chain_eligible(instance) -> bool:
    """True when the fast closed-form chains apply to this instance."""
    return instance.f_overrides is None and instance.f.kind == "quadratic"


def chain_args(instance):
    """(kappa, w, lambda2, lo, hi) for the chain routines."""
    p = instance.params
    kappa = p.lambda1 * instance.f.params["c"]
    if p.domain is None:
        lo = np.full(p.d, -np.inf)
        hi = np.full(p.d, np.inf)
    else:
        lo = np.ascontiguousarray(p.domain.lower)
        hi = np.ascontiguousarray(p.domain.upper)
    return kappa, p.w, p.lambda2, lo, hi
