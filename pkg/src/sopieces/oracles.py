"""Brute-force counts by literal enumeration, used to check the closed formulas."""
from __future__ import annotations

import itertools
from collections import Counter

import numpy as np

from .gf import FieldCtx
from .linalg import all_vectors, nullspace, rank
from .quadspace import QuadForm

STEP_GUARD = 10 ** 8


class OracleGuard(RuntimeError):
    pass


def _guard(work: int):
    if work > STEP_GUARD:
        raise OracleGuard(f"brute force needs about {work} steps")


def gaussian_binomial(n: int, k: int, q: int) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def subspace_batches(F: FieldCtx, n: int, k: int, chunk: int = 4096):
    """All k-dim subspaces of GF(q)^n as RREF bases, in batches of shape (b, k, n)."""
    q = F.q
    if k == 0:
        yield np.zeros((1, 0, n), dtype=np.int64)
        return
    for piv in itertools.combinations(range(n), k):
        free = [(i, c) for i, p in enumerate(piv) for c in range(p + 1, n) if c not in piv]
        base = np.zeros((k, n), dtype=np.int64)
        for i, p in enumerate(piv):
            base[i, p] = 1
        total = q ** len(free)
        rows = np.array([i for i, _ in free], dtype=np.int64)
        cols = np.array([c for _, c in free], dtype=np.int64)
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
            out = np.broadcast_to(base, (idx.size, k, n)).copy()
            t = idx.copy()
            for j in range(len(free)):
                out[:, rows[j], cols[j]] = t % q
                t //= q
            yield out


def _restricted(F: FieldCtx, form: QuadForm, bases):
    """Upper gram matrices of the form restricted to each basis, shape (b, k, k)."""
    M = form.gram_upper
    B = form.bilinear
    qv = F.sum(F.mul(F.bmatmul(bases, np.broadcast_to(M, (bases.shape[0],) + M.shape)), bases), axis=-1)
    P = F.bmatmul(F.bmatmul(bases, np.broadcast_to(B, (bases.shape[0],) + B.shape)),
                  np.swapaxes(bases, 1, 2))
    k = bases.shape[1]
    up = np.triu(P, 1)
    idx = np.arange(k)
    up[:, idx, idx] = qv
    return up


def classify_forms(F: FieldCtx, grams, alternating: bool = False):
    """For a batch of upper gram matrices: 0 degenerate, 1 nondegenerate odd, +-2 even of type +-1.

    Literal: scans every vector of the k-dim space for a singular radical vector,
    and for even k reads the type off the number of singular vectors. With
    `alternating`, grams are full bilinear matrices and only the radical matters.
    """
    b, k, _ = grams.shape
    if k == 0:
        return np.full(b, 2, dtype=np.int64)
    q = F.q
    X = all_vectors(q, k)                        # (q^k, k)
    if alternating:
        Bm = grams
    else:
        Bm = F.add(grams, np.swapaxes(grams, 1, 2))
    # radical test: B x = 0
    rad = F.bmatmul(np.broadcast_to(X, (b,) + X.shape), np.swapaxes(Bm, 1, 2))   # (b, q^k, k) = x^T B^T
    in_rad = ~rad.any(axis=-1)
    in_rad[:, 0] = False
    if alternating:
        bad = in_rad.any(axis=1)
        return np.where(bad, 0, 2)
    XM = F.bmatmul(np.broadcast_to(X, (b,) + X.shape), grams)           # (b, q^k, k)
    vals = F.sum(F.mul(XM, X[None, :, :]), axis=-1)                     # (b, q^k)
    bad = (in_rad & (vals == 0)).any(axis=1)
    out = np.zeros(b, dtype=np.int64)
    if k % 2:
        out[~bad] = 1
        return out
    sing = (vals == 0).sum(axis=1)
    w = k // 2
    split = q ** (k - 1) + q ** w - q ** (w - 1)
    out[~bad & (sing == split)] = 2
    out[~bad & (sing != split)] = -2
    return out


def _chunk_for(q: int, k: int) -> int:
    return max(1, min(4096, 3_000_000 // max(1, q ** k * max(k, 1) ** 2)))


def nondegenerate_subspaces(form: QuadForm, k: int, alternating: bool = False):
    """Yield (basis, code) for k-dim subspaces with nondegenerate restriction."""
    F = form.ctx
    n = form.D
    _guard(gaussian_binomial(n, k, F.q) * F.q ** k * max(k, 1) ** 2)
    for bases in subspace_batches(F, n, k, _chunk_for(F.q, k)):
        if alternating:
            B = form.bilinear
            grams = F.bmatmul(F.bmatmul(bases, np.broadcast_to(B, (bases.shape[0],) + B.shape)),
                              np.swapaxes(bases, 1, 2))
        else:
            grams = _restricted(F, form, bases)
        codes = classify_forms(F, grams, alternating)
        for i in np.flatnonzero(codes):
            yield bases[i], int(codes[i])


def bf_census(form: QuadForm, k: int) -> Counter:
    """Counts of k-dim subspaces by restricted type: 'odd', 1, -1 (nondegenerate only)."""
    names = {1: "odd", 2: 1, -2: -1}
    out = Counter()
    for _, code in nondegenerate_subspaces(form, k):
        out[names[code]] += 1
    return out


def bf_count_subspaces(form: QuadForm, k: int, delta=None) -> int:
    """Number of k-dim subspaces with nondegenerate restriction (of type delta if given)."""
    c = bf_census(form, k)
    if delta is None:
        return sum(c.values())
    return c[delta]


def _restrict_to(form: QuadForm, basis) -> QuadForm:
    return QuadForm(form.ctx, form.gram_in_basis(basis))


def bf_count_flags(form: QuadForm, dims) -> int:
    """Chains U_1 > U_2 > ... with dim U_i = dims[i] and nondegenerate restrictions.

    dims[0] must be the dimension of the space itself.
    """
    dims = [d for d in dims]
    if dims[0] != form.D:
        raise ValueError("first dimension must be the ambient dimension")
    if len(dims) == 1:
        return 1
    total = 0
    for basis, _ in nondegenerate_subspaces(form, dims[1]):
        total += bf_count_flags(_restrict_to(form, basis), dims[1:])
    return total


class _Alternating:
    """A bilinear form wrapper exposing the interface nondegenerate_subspaces needs."""

    def __init__(self, F, B):
        self.ctx = F
        self.bilinear = np.asarray(B, dtype=np.int64)
        self.D = self.bilinear.shape[0]


def standard_symplectic(F: FieldCtx, n: int) -> _Alternating:
    B = np.zeros((n, n), dtype=np.int64)
    for i in range(0, n, 2):
        B[i, i + 1] = 1
        B[i + 1, i] = F.s_neg(1)
    return _Alternating(F, B)


def bf_count_symplectic_flags(F: FieldCtx, dims) -> int:
    form = standard_symplectic(F, dims[0])
    return _symp_flags(form, list(dims))


def _symp_flags(form, dims):
    if len(dims) == 1:
        return 1
    F = form.ctx
    total = 0
    for basis, _ in nondegenerate_subspaces(form, dims[1], alternating=True):
        B = F.matmul(F.matmul(basis, form.bilinear), basis.T)
        total += _symp_flags(_Alternating(F, B), dims[1:])
    return total


# ---------------------------------------------------------------- group orders

def bf_gl_order(F: FieldCtx, m: int) -> int:
    """Number of invertible m x m matrices, by scanning all matrices."""
    q = F.q
    _guard(q ** (m * m) * m ** 3)
    if m == 0:
        return 1
    vecs = all_vectors(q, m)
    count = 0

    def extend(rows):
        nonlocal count
        if len(rows) == m:
            count += 1
            return
        r = len(rows)
        for v in vecs:
            trial = np.vstack(rows + [v]) if rows else v[None, :]
            if rank(F, trial) == r + 1:
                extend(rows + [v])

    extend([])
    return count


def _preserving_columns(F, gram_diag, pair, vec_q, vec_pair_fn, n):
    """Count tuples (g_1..g_n) of vectors with Q(g_i) = diag[i] and <g_i,g_j> = pair[i][j]."""
    count = 0

    def extend(chosen):
        nonlocal count
        i = len(chosen)
        if i == n:
            count += 1
            return
        cand = np.flatnonzero(vec_q == gram_diag[i]) if gram_diag is not None else np.arange(len(vec_q))
        for j in range(i):
            cand = cand[vec_pair_fn(chosen[j], cand) == pair[j][i]]
        for c in cand:
            extend(chosen + [int(c)])

    extend([])
    return count


def bf_isometry_order(form: QuadForm) -> int:
    """|O(Q)| by choosing images of basis vectors one at a time."""
    F = form.ctx
    n = form.D
    V = all_vectors(F.q, n)
    _guard(len(V) * n * 10 ** 3)
    qv = form.Q_many(V)
    P = form.pairing(V, V)
    basis_q = np.diag(form.gram_upper)
    basis_pair = form.bilinear
    return _preserving_columns(F, basis_q, basis_pair, qv, lambda j, cand: P[j, cand], n)


def bf_symplectic_order(F: FieldCtx, m: int) -> int:
    form = standard_symplectic(F, m)
    V = all_vectors(F.q, m)
    _guard(len(V) * m * 10 ** 3)
    P = F.matmul(F.matmul(V, form.bilinear), V.T)
    return _preserving_columns(F, None, form.bilinear, np.zeros(len(V)), lambda j, cand: P[j, cand], m)


# ---------------------------------------------------------------- graded maps

def _linear_E2_basis(model):
    """Basis of the linear space E^2 of the graded model, as flattened matrices."""
    F = model.ctx
    D = model.D
    mask = model.degree_two_mask()
    pos = np.argwhere(mask)
    nvar = len(pos)
    if nvar == 0:
        return np.zeros((0, D, D), dtype=np.int64)
    B = model.form.bilinear
    rows = []
    # BT + (BT)^T = 0 : entries sum_k B[i,k] T[k,j] + B[j,k] T[k,i]
    for i in range(D):
        for j in range(i, D):
            row = np.zeros(nvar, dtype=np.int64)
            for v, (r, c) in enumerate(pos):
                val = 0
                if c == j:
                    val = F.s_add(val, int(B[i, r]))
                if c == i:
                    val = F.s_add(val, int(B[j, r]))
                row[v] = val
            rows.append(row)
    if -1 in model.slices:
        sl = model.slices[-1]
        for i in range(sl.start, sl.stop):
            row = np.zeros(nvar, dtype=np.int64)
            for v, (r, c) in enumerate(pos):
                if c == i:
                    row[v] = int(B[i, r])
            rows.append(row)
    ns = nullspace(F, np.array(rows, dtype=np.int64))
    out = np.zeros((ns.shape[0], D, D), dtype=np.int64)
    for t, vec in enumerate(ns):
        out[t][pos[:, 0], pos[:, 1]] = vec
    return out


def bf_count_E2star(model) -> int:
    """|E^2_*| of a graded model: every element of E^2 is tested."""
    F = model.ctx
    basis = _linear_E2_basis(model)
    dim = basis.shape[0]
    _guard(F.q ** dim * model.D ** 3)
    coeffs = all_vectors(F.q, dim)
    count = 0
    for c in coeffs:
        if dim:
            T = F.sum(F.mul(c[:, None, None], basis), axis=0)
        else:
            T = np.zeros((model.D, model.D), dtype=np.int64)
        if not model.in_E2(T):
            raise AssertionError("linear description of E^2 is wrong")
        if model.star_conditions(T):
            count += 1
    return count


def iter_E_ge2(filt, star: bool = True):
    """Yield every twisted N raising a splitting of X^* by two degrees.

    With star=True only those whose graded part lies in E^2_* are kept.
    """
    from .filtration import GradedView, split_filtration
    from .linalg import inverse
    from .nilpotent import satisfies_twist
    s = filt.space
    F = s.ctx
    pieces = split_filtration(filt)
    degs = sorted(pieces)
    basis = np.vstack([pieces[a] for a in degs])
    deg_of = np.concatenate([[a] * pieces[a].shape[0] for a in degs])
    P = basis.T
    Pinv = inverse(F, P)
    pos = np.argwhere(deg_of[:, None] >= deg_of[None, :] + 2)
    _guard(F.q ** len(pos) * s.D ** 3)
    view = GradedView.of(filt)
    for vals in itertools.product(range(F.q), repeat=len(pos)):
        Nsp = np.zeros((s.D, s.D), dtype=np.int64)
        if len(pos):
            Nsp[pos[:, 0], pos[:, 1]] = vals
        N = F.matmul(P, F.matmul(Nsp, Pinv))
        if not satisfies_twist(s, N):
            continue
        if star:
            T = view.bar(N)
            if not (view.model.in_E2(T) and view.model.star_conditions(T)):
                continue
        yield N


def bf_count_E_ge2_star(filt) -> int:
    """|E^{>=2}_* X^*| by scanning every map raising a splitting of X^* by two degrees."""
    return sum(1 for _ in iter_E_ge2(filt))
