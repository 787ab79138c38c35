"""Per-element classification kernels.

`classify_batch(space, Ns, keep_shift=True)` runs the canonical filtration, every
adaptedness condition, the reduction invariants and the labels for each N in Ns.
The compiled module is used when it imports; set SOPIECES_PURE=1 to force the
Python implementation.
"""
from __future__ import annotations

import os

import numpy as np

from . import _fallback
from ._fallback import (FLAG_CLASS, FLAG_E2, FLAG_LINE, FLAG_NILPOTENT, FLAG_QFILT,
                        FLAG_RAISES, FLAG_STAR, FLAG_TWIST, MAXLEV, filtration_hash)

try:
    if os.environ.get("SOPIECES_PURE"):
        raise ImportError("pure Python requested")
    from . import _core
except ImportError:
    _core = None

BACKEND = "compiled" if _core is not None else "python"

ADAPTED = FLAG_NILPOTENT | FLAG_TWIST | FLAG_QFILT | FLAG_RAISES | FLAG_E2 | FLAG_STAR


def _compiled_ok(space) -> bool:
    return _core is not None and space.D <= _core.max_dimension() and space.ctx.q <= 64


def classify_batch(space, Ns, keep_shift: bool = True, backend: str | None = None) -> dict:
    """Classify a stack of nilpotent maps; see the module docstring."""
    Ns = np.asarray(Ns, dtype=np.int64).reshape(-1, space.D, space.D)
    use = backend or ("compiled" if _compiled_ok(space) else "python")
    if use == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not available")
        ref = space.reference_lagrangian.basis if space.eta == 1 else None
        return _core.classify_batch(space.ctx, space.gram_upper, ref, Ns, keep_shift)
    return _fallback.classify_batch(space, Ns, keep_shift)


__all__ = ["classify_batch", "filtration_hash", "BACKEND", "ADAPTED", "MAXLEV",
           "FLAG_NILPOTENT", "FLAG_TWIST", "FLAG_QFILT", "FLAG_RAISES", "FLAG_E2",
           "FLAG_STAR", "FLAG_LINE", "FLAG_CLASS"]
