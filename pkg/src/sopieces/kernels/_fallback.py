"""Pure-Python version of the per-element classification, built on the library modules.

Produces exactly the arrays of the compiled `classify_batch`.
"""
from __future__ import annotations

import numpy as np

from ..filtration import GradedView, adaptedness, canonical_filtration
from ..linalg import Subspace, mat_pow, nullspace, rank
from ..nilpotent import (InvariantViolation, check_line, eps_bits, jordan_data,
                         nilpotency_index, reduce_once, satisfies_twist)

MAXLEV = 8

FLAG_NILPOTENT = 1
FLAG_TWIST = 2
FLAG_QFILT = 4
FLAG_RAISES = 8
FLAG_E2 = 16
FLAG_STAR = 32
FLAG_LINE = 64
FLAG_CLASS = 128

_MASK = (1 << 64) - 1
_FNV_PRIME = 1099511628211
_FNV_OFFSET = 14695981039346656037


def filtration_hash(filt) -> int:
    """FNV-1a over dims and reduced bases of X^{>=a}, a = -D-2 .. D+3."""
    D = filt.space.D
    h = _FNV_OFFSET
    for a in range(-D - 2, D + 4):
        X = filt.X(a)
        vals = [X.dim] + [int(v) for v in X.basis.ravel()]
        for v in vals:
            h ^= v + 1
            h = (h * _FNV_PRIME) & _MASK
    return h


def _levels(s, N):
    """Per-level (e, c, eps, lam) of the reduction chain, and whether every line check held."""
    F = s.ctx
    out = []
    ok = True
    while True:
        e, c = jordan_data(F, N)
        eps = eps_bits(s, N) if F.p == 2 and s.D else (0,) * s.D
        if e <= 0:
            out.append((e, c, eps, False))
            return out, ok
        red = reduce_once(s, N, e)
        try:
            check_line(s, N, red.L, red.lam_nonzero, e)
        except InvariantViolation:
            ok = False
        out.append((e, c, eps, red.lam_nonzero))
        s, N = red.space, red.N


def _class_reps(filt, N, D):
    """Representative half-degree for each even degree with odd f (char 2, f_0 > 0)."""
    s = filt.space
    F = s.ctx
    view = GradedView.of(filt)
    srep = [-1] * (D // 2 + 1)
    lines = {}
    ok = True
    X1 = filt.X(1)
    for half in range(D // 2 + 1):
        a = 2 * half
        C = view.comps.get(-a)
        if C is None or C.shape[0] % 2 == 0:
            continue
        Y = F.matmul(C, mat_pow(F, N, half).T)
        G = s.pairing(Y, Y)
        rad = nullspace(F, G)
        if rad.shape[0] != 1:
            ok = False
            continue
        z = F.matmul(rad, Y)[0]
        lines[half] = z
        srep[half] = half
        for b in range(half):
            if srep[b] == b and (X1 + Subspace(F, D, lines[b][None, :])).contains(z):
                srep[half] = b
                break
        for b in range(half):
            if srep[b] >= 0 and view.comps[-2 * b].shape[0] == C.shape[0] and srep[b] != srep[half]:
                ok = False
    return srep, ok


def classify_one(s, N, keep_shift=True) -> dict:
    F = s.ctx
    D = s.D
    N = np.asarray(N, dtype=np.int64)
    rec = dict(flags=0, e=-1, dimker=0, c=[0] * D, eps=[0] * D, f=[0] * (2 * D + 1), comp=-1,
               xi=[0] * (D + 1), srep=[-1] * (D // 2 + 1), nlev=0, lev_e=[0] * MAXLEV,
               lev_lam=[0] * MAXLEV, lev_c=[[0] * D for _ in range(MAXLEV)],
               lev_eps=[[0] * D for _ in range(MAXLEV)], fhash=0)
    if nilpotency_index(F, N) < 0:
        return rec
    e, c = jordan_data(F, N)
    flags = FLAG_NILPOTENT
    rec["e"] = e
    rec["c"] = list(c)
    rec["eps"] = list(eps_bits(s, N)) if F.p == 2 and D else [0] * D
    rec["dimker"] = D - rank(F, N)
    if satisfies_twist(s, N):
        flags |= FLAG_TWIST
    levels, ok_line = _levels(s, N)
    rec["nlev"] = len(levels)
    for j, (le, lc, leps, lam) in enumerate(levels):
        rec["lev_e"][j] = le
        rec["lev_lam"][j] = int(lam)
        rec["lev_c"][j][:len(lc)] = list(lc)
        rec["lev_eps"][j][:len(leps)] = list(leps)
    if ok_line:
        flags |= FLAG_LINE
    filt = canonical_filtration(s, N, keep_shift=keep_shift, check=False)
    rep = adaptedness(filt, N)
    for key, bit in (("q_filtration", FLAG_QFILT), ("raises_by_two", FLAG_RAISES),
                     ("graded_E2", FLAG_E2), ("graded_star", FLAG_STAR)):
        if rep[key]:
            flags |= bit
    for a in range(-D, D + 1):
        rec["f"][a + D] = filt.f(a)
    view = GradedView.of(filt)
    for m in range(1, D + 1):
        C = view.comps.get(-m)
        if C is None:
            continue
        NC = F.matmul(C, mat_pow(F, N, m).T)
        rec["xi"][m] = C.shape[0] - rank(F, s.pairing(C, NC))
    if D % 2 == 0 and D > 0 and filt.f(0) == 0 and s.eta == 1:
        ref = s.reference_lagrangian
        rec["comp"] = (ref.dim - (ref & filt.X(1)).dim) % 2
    if F.p == 2 and filt.f(0) > 0:
        srep, ok = _class_reps(filt, N, D)
        rec["srep"] = srep
        if ok:
            flags |= FLAG_CLASS
    else:
        flags |= FLAG_CLASS
    rec["fhash"] = filtration_hash(filt)
    rec["flags"] = flags
    return rec


def classify_batch(space, Ns, keep_shift=True) -> dict:
    D = space.D
    Ns = np.asarray(Ns, dtype=np.int64).reshape(-1, D, D)
    recs = [classify_one(space, N, keep_shift) for N in Ns]
    n = len(recs)
    out = dict(
        flags=np.array([r["flags"] for r in recs], dtype=np.int32).reshape(n),
        e=np.array([r["e"] for r in recs], dtype=np.int8).reshape(n),
        dimker=np.array([r["dimker"] for r in recs], dtype=np.int8).reshape(n),
        c=np.array([r["c"] for r in recs], dtype=np.int8).reshape(n, D),
        eps=np.array([r["eps"] for r in recs], dtype=np.int8).reshape(n, D),
        f=np.array([r["f"] for r in recs], dtype=np.int8).reshape(n, 2 * D + 1),
        comp=np.array([r["comp"] for r in recs], dtype=np.int8).reshape(n),
        xi=np.array([r["xi"] for r in recs], dtype=np.int8).reshape(n, D + 1),
        srep=np.array([r["srep"] for r in recs], dtype=np.int8).reshape(n, D // 2 + 1),
        nlev=np.array([r["nlev"] for r in recs], dtype=np.int8).reshape(n),
        lev_e=np.array([r["lev_e"] for r in recs], dtype=np.int8).reshape(n, MAXLEV),
        lev_lam=np.array([r["lev_lam"] for r in recs], dtype=np.int8).reshape(n, MAXLEV),
        lev_c=np.array([r["lev_c"] for r in recs], dtype=np.int8).reshape(n, MAXLEV, D),
        lev_eps=np.array([r["lev_eps"] for r in recs], dtype=np.int8).reshape(n, MAXLEV, D),
        fhash=np.array([r["fhash"] for r in recs], dtype=np.uint64).reshape(n),
    )
    return out
