"""Dense linear algebra over GF(q).

Vectors are 1-d int64 arrays of element encodings, matrices act on column
vectors (y = M x). A Subspace keeps a reduced row-echelon basis, so equality
and hashing are exact.
"""
from __future__ import annotations

import numpy as np

from .gf import FieldCtx, field_of_order


def as_array(a) -> np.ndarray:
    return np.array(a, dtype=np.int64)


def as_rows(a, D: int) -> np.ndarray:
    """View a as a stack of length-D row vectors."""
    a = np.asarray(a, dtype=np.int64)
    return a.reshape(-1, D) if D else np.zeros((0, 0), dtype=np.int64)


def rref(F: FieldCtx, M) -> tuple[np.ndarray, tuple[int, ...]]:
    """Reduced row-echelon form of M; returns the nonzero rows and pivot columns."""
    R = np.array(M, dtype=np.int64)
    if R.ndim != 2:
        raise ValueError("rref needs a 2-d array")
    rows, cols = R.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        lead = int(R[r, c])
        if lead != 1:
            R[r] = F.mul(R[r], F.inv_table[lead])
        col = R[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            R[hit] = F.sub(R[hit], F.mul(col[hit, None], R[r][None, :]))
        piv.append(c)
        r += 1
    return R[:r], tuple(piv)


def rank(F: FieldCtx, M) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return len(rref(F, M)[1])


def nullspace(F: FieldCtx, M) -> np.ndarray:
    """Rows spanning {x : M x = 0}."""
    M = np.asarray(M, dtype=np.int64)
    cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    R, piv = rref(F, M)
    free = [c for c in range(cols) if c not in piv]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for t, fc in enumerate(free):
        out[t, fc] = 1
        for i, pc in enumerate(piv):
            out[t, pc] = F.neg(R[i, fc])
    return out


def inverse(F: FieldCtx, M) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    R, piv = rref(F, np.hstack([M, np.eye(n, dtype=np.int64)]))
    if piv[:n] != tuple(range(n)) or len(piv) < n:
        raise ValueError("matrix is singular")
    return R[:n, n:]


def determinant(F: FieldCtx, M) -> int:
    A = np.array(M, dtype=np.int64)
    n = A.shape[0]
    det = 1
    for c in range(n):
        nz = np.flatnonzero(A[c:, c])
        if nz.size == 0:
            return 0
        i = c + int(nz[0])
        if i != c:
            A[[c, i]] = A[[i, c]]
            det = F.s_neg(det)
        lead = int(A[c, c])
        det = F.s_mul(det, lead)
        below = A[c + 1:, c]
        if below.any():
            factor = F.mul(below, F.inv_table[lead])
            A[c + 1:] = F.sub(A[c + 1:], F.mul(factor[:, None], A[c][None, :]))
    return det


def mat_pow(F: FieldCtx, M, e: int) -> np.ndarray:
    M = np.asarray(M, dtype=np.int64)
    out = np.eye(M.shape[0], dtype=np.int64)
    base = M
    while e:
        if e & 1:
            out = F.matmul(out, base)
        base = F.matmul(base, base)
        e >>= 1
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


class Mat:
    """An immutable matrix over a finite field."""

    __slots__ = ("ctx", "a")

    def __init__(self, ctx: FieldCtx, entries):
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("matrix entries must be 2-d")
        if a.size and (a.min() < 0 or a.max() >= ctx.q):
            raise ValueError(f"entries must be encodings in [0, {ctx.q})")
        self.ctx = ctx
        self.a = _frozen(a)

    @classmethod
    def identity(cls, ctx, n):
        return cls(ctx, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, ctx, rows, cols=None):
        return cls(ctx, np.zeros((rows, rows if cols is None else cols), dtype=np.int64))

    @property
    def rows(self):
        return self.a.shape[0]

    @property
    def cols(self):
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    def _check(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if other.ctx is not self.ctx:
            raise ValueError("matrices over different fields")
        return other

    def __matmul__(self, other):
        if isinstance(other, np.ndarray):
            return self.ctx.matmul(self.a, other)
        other = self._check(other)
        if self.cols != other.rows:
            raise ValueError(f"dimension mismatch {self.shape} @ {other.shape}")
        return Mat(self.ctx, self.ctx.matmul(self.a, other.a))

    def __add__(self, other):
        other = self._check(other)
        if self.shape != other.shape:
            raise ValueError("dimension mismatch")
        return Mat(self.ctx, self.ctx.add(self.a, other.a))

    def __sub__(self, other):
        other = self._check(other)
        if self.shape != other.shape:
            raise ValueError("dimension mismatch")
        return Mat(self.ctx, self.ctx.sub(self.a, other.a))

    def __neg__(self):
        return Mat(self.ctx, self.ctx.neg(self.a))

    def __pow__(self, e: int):
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        if e < 0:
            return self.inverse() ** (-e)
        return Mat(self.ctx, mat_pow(self.ctx, self.a, e))

    @property
    def T(self):
        return Mat(self.ctx, self.a.T)

    def inverse(self):
        return Mat(self.ctx, inverse(self.ctx, self.a))

    def rank(self) -> int:
        return rank(self.ctx, self.a)

    def is_zero(self) -> bool:
        return not self.a.any()

    def is_identity(self) -> bool:
        return self.rows == self.cols and np.array_equal(self.a, np.eye(self.rows, dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return self.ctx.q == other.ctx.q and np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash((self.ctx.q, self.a.shape, self.a.tobytes()))

    def __repr__(self):
        return f"Mat(GF({self.ctx.q}), {self.a.tolist()})"

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols} {self.ctx.q}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.a]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, ctx: FieldCtx | None = None) -> "Mat":
        tok = text.split()
        if len(tok) < 3:
            raise ValueError("matrix text needs a 'rows cols q' header")
        rows, cols, q = (int(t) for t in tok[:3])
        if ctx is None:
            ctx = field_of_order(q)
        elif ctx.q != q:
            raise ValueError(f"matrix is over GF({q}), expected GF({ctx.q})")
        body = tok[3:]
        if len(body) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, found {len(body)}")
        return cls(ctx, np.array([int(t) for t in body], dtype=np.int64).reshape(rows, cols))


class Subspace:
    """A subspace of GF(q)^D stored by its reduced row-echelon basis."""

    __slots__ = ("ctx", "D", "basis", "pivots")

    def __init__(self, ctx: FieldCtx, D: int, basis, *, reduced: bool = False, pivots=None):
        b = np.array(basis, dtype=np.int64)
        b = b.reshape(-1, D) if D else np.zeros((0, 0), dtype=np.int64)
        if not reduced:
            b, pivots = rref(ctx, b) if b.shape[0] else (b, ())
        self.ctx = ctx
        self.D = D
        self.basis = _frozen(b)
        self.pivots = tuple(pivots) if pivots is not None else tuple(
            int(np.flatnonzero(row)[0]) for row in b)

    @classmethod
    def span(cls, ctx, D, vectors):
        return cls(ctx, D, np.array(vectors, dtype=np.int64).reshape(-1, D))

    @classmethod
    def zero(cls, ctx, D):
        return cls(ctx, D, np.zeros((0, D), dtype=np.int64), reduced=True, pivots=())

    @classmethod
    def full(cls, ctx, D):
        return cls(ctx, D, np.eye(D, dtype=np.int64), reduced=True, pivots=tuple(range(D)))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __len__(self):
        return self.dim

    def _same(self, other):
        if self.D != other.D or self.ctx.q != other.ctx.q:
            raise ValueError("subspaces of different ambient spaces")

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return (self.D == other.D and self.ctx.q == other.ctx.q
                and np.array_equal(self.basis, other.basis))

    def __hash__(self):
        return hash((self.ctx.q, self.D, self.basis.tobytes()))

    def __repr__(self):
        return f"Subspace(D={self.D}, {self.basis.tolist()})"

    def coords(self, v) -> np.ndarray | None:
        """Coefficients of v in the RREF basis, or None if v is not in the space."""
        v = np.asarray(v, dtype=np.int64)
        c = v[list(self.pivots)]
        if self.dim:
            back = self.ctx.matmul(c, self.basis)
        else:
            back = np.zeros(self.D, dtype=np.int64)
        return c if np.array_equal(back, v) else None

    def contains(self, v) -> bool:
        return self.coords(v) is not None

    def __contains__(self, v):
        return self.contains(v)

    def issubset(self, other: "Subspace") -> bool:
        self._same(other)
        if self.dim > other.dim:
            return False
        if not self.dim:
            return True
        c = self.basis[:, list(other.pivots)]
        back = self.ctx.matmul(c, other.basis) if other.dim else np.zeros_like(self.basis)
        return np.array_equal(back, self.basis)

    def __le__(self, other):
        return self.issubset(other)

    def __add__(self, other):
        self._same(other)
        return Subspace(self.ctx, self.D, np.vstack([self.basis, other.basis]))

    def __and__(self, other):
        return intersect(self, other)

    def apply(self, m) -> "Subspace":
        """Image of this subspace under the matrix m."""
        a = m.a if isinstance(m, Mat) else np.asarray(m)
        return Subspace(self.ctx, a.shape[0], self.ctx.matmul(self.basis, a.T))

    def vectors(self):
        """All vectors of the subspace (q^dim of them), as an array."""
        coeffs = all_vectors(self.ctx.q, self.dim)
        if not self.dim:
            return np.zeros((1, self.D), dtype=np.int64)
        return self.ctx.matmul(coeffs, self.basis)


def all_vectors(q: int, n: int) -> np.ndarray:
    """All of GF(q)^n in base-q counting order (first coordinate fastest)."""
    idx = np.arange(q ** n, dtype=np.int64)
    out = np.empty((q ** n, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = idx % q
        idx //= q
    return out


def kernel(m: Mat) -> Subspace:
    return Subspace(m.ctx, m.cols, nullspace(m.ctx, m.a))


def image(m: Mat) -> Subspace:
    return Subspace(m.ctx, m.rows, m.a.T)


def solve(m: Mat, rhs) -> np.ndarray | None:
    """Some x with m x = rhs, or None when inconsistent."""
    F = m.ctx
    rhs = np.asarray(rhs, dtype=np.int64)
    if rhs.shape != (m.rows,):
        raise ValueError("right-hand side has the wrong length")
    R, piv = rref(F, np.hstack([m.a, rhs[:, None]]))
    if m.cols in piv:
        return None
    x = np.zeros(m.cols, dtype=np.int64)
    for i, pc in enumerate(piv):
        x[pc] = R[i, m.cols]
    return x


def intersect(a: Subspace, b: Subspace) -> Subspace:
    a._same(b)
    F = a.ctx
    if not a.dim or not b.dim:
        return Subspace.zero(F, a.D)
    # (alpha, beta) with alpha A = beta B
    sols = nullspace(F, np.vstack([a.basis, F.neg(b.basis)]).T)
    if not sols.shape[0]:
        return Subspace.zero(F, a.D)
    return Subspace(F, a.D, F.matmul(sols[:, :a.dim], a.basis))


def sum_spaces(*spaces: Subspace) -> Subspace:
    first = spaces[0]
    return Subspace(first.ctx, first.D, np.vstack([s.basis for s in spaces]))


def quotient_map(D: int, sub: Subspace) -> tuple[Mat, Mat]:
    """Projection GF(q)^D -> GF(q)^D / sub and a section back.

    Quotient coordinates are the non-pivot coordinates of sub's RREF basis.
    """
    F = sub.ctx
    free = [c for c in range(D) if c not in sub.pivots]
    proj = np.zeros((len(free), D), dtype=np.int64)
    for i, c in enumerate(free):
        proj[i, c] = 1
        for r, pc in enumerate(sub.pivots):
            proj[i, pc] = F.neg(sub.basis[r, c])
    section = np.zeros((D, len(free)), dtype=np.int64)
    for i, c in enumerate(free):
        section[c, i] = 1
    return Mat(F, proj), Mat(F, section)


class Quotient:
    """Coordinates on big/small for subspaces small <= big of GF(q)^D."""

    def __init__(self, big: Subspace, small: Subspace):
        F = big.ctx
        if not small.issubset(big):
            raise ValueError("quotient needs small <= big")
        self.big, self.small, self.ctx = big, small, F
        comp = []
        acc = small.basis
        r = small.dim
        for v in big.basis:
            trial = np.vstack([acc, v[None, :]])
            if rank(F, trial) > r:
                acc, r = trial, r + 1
                comp.append(v)
        self.complement = np.array(comp, dtype=np.int64).reshape(-1, big.D)
        self.dim = self.complement.shape[0]
        T = np.vstack([small.basis, self.complement])
        piv = list(big.pivots)
        Minv = inverse(F, T[:, piv]) if len(piv) else np.zeros((0, 0), dtype=np.int64)
        proj = np.zeros((self.dim, big.D), dtype=np.int64)
        if self.dim:
            proj[:, piv] = Minv[:, small.dim:].T
        self.proj = proj            # dim x D, valid on big
        self.section = self.complement.T.copy()  # D x dim

    def project(self, v) -> np.ndarray:
        return self.ctx.matmul(self.proj, np.asarray(v, dtype=np.int64))

    def lift(self, y) -> np.ndarray:
        return self.ctx.matmul(self.section, np.asarray(y, dtype=np.int64))

    def induced(self, N) -> np.ndarray:
        """Matrix of the map induced on big/small by N (which must preserve both)."""
        F = self.ctx
        N = N.a if isinstance(N, Mat) else np.asarray(N)
        return F.matmul(self.proj, F.matmul(N, self.section))

    def pullback(self, sub_basis) -> Subspace:
        """Preimage in big of a subspace of the quotient given by basis rows."""
        F = self.ctx
        sub_basis = np.asarray(sub_basis, dtype=np.int64)
        lifted = F.matmul(sub_basis.reshape(-1, self.dim), self.complement) if sub_basis.size else \
            np.zeros((0, self.big.D), dtype=np.int64)
        return Subspace(F, self.big.D, np.vstack([self.small.basis, lifted]))
