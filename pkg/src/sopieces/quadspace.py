"""Quadratic forms over GF(q) and their standard models.

A form is Q(x) = x^T M x with M upper triangular; its polarisation is the
symmetric matrix B = M + M^T.
"""
from __future__ import annotations

import re
from functools import cached_property

import numpy as np

from .gf import FieldCtx, field_of_order
from .linalg import Mat, Quotient, Subspace, all_vectors, as_rows, nullspace


class DegenerateForm(ValueError):
    pass


def upper_from_values(F: FieldCtx, diag, pair) -> np.ndarray:
    """Upper-triangular gram matrix from Q(b_i) and <b_i, b_j>."""
    n = len(diag)
    M = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        M[i, i] = diag[i]
        for j in range(i + 1, n):
            M[i, j] = pair[i][j]
    return M


class QuadForm:
    """A possibly degenerate quadratic form on GF(q)^D."""

    def __init__(self, ctx: FieldCtx, gram_upper):
        M = np.array(gram_upper, dtype=np.int64)
        D = M.shape[0]
        if M.shape != (D, D):
            raise ValueError("gram matrix must be square")
        if np.tril(M, -1).any():
            raise ValueError("gram matrix must be upper triangular")
        self.ctx = ctx
        self.D = D
        M.setflags(write=False)
        self.gram_upper = M
        B = ctx.add(M, M.T)
        B.setflags(write=False)
        self.bilinear = B

    def Q(self, x) -> int:
        x = np.asarray(x, dtype=np.int64)
        F = self.ctx
        return int(F.sum(F.mul(F.matmul(x, self.gram_upper), x)))

    def Q_many(self, X) -> np.ndarray:
        """Q on each row of X."""
        F = self.ctx
        X = np.asarray(X, dtype=np.int64)
        if X.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        return F.sum(F.mul(F.matmul(X, self.gram_upper), X), axis=1)

    def B(self, x, y) -> int:
        F = self.ctx
        return int(F.matmul(F.matmul(np.asarray(x), self.bilinear), np.asarray(y)))

    def pairing(self, X, Y) -> np.ndarray:
        """Matrix of <x_i, y_j> for rows x_i of X and y_j of Y."""
        F = self.ctx
        return F.matmul(F.matmul(np.asarray(X), self.bilinear), np.asarray(Y).T)

    @cached_property
    def radical(self) -> Subspace:
        return Subspace(self.ctx, self.D, nullspace(self.ctx, self.bilinear))

    def is_nondegenerate(self) -> bool:
        R = self.radical
        if R.dim == 0:
            return True
        if self.ctx.p != 2 or R.dim > 1:
            return False
        return self.Q(R.basis[0]) != 0

    def perp(self, w: Subspace) -> Subspace:
        if w.dim == 0:
            return Subspace.full(self.ctx, self.D)
        return Subspace(self.ctx, self.D, nullspace(self.ctx, self.ctx.matmul(w.basis, self.bilinear)))

    def is_totally_singular(self, w: Subspace) -> bool:
        if w.dim == 0:
            return True
        if self.Q_many(w.basis).any():
            return False
        return not self.pairing(w.basis, w.basis).any()

    def gram_in_basis(self, basis) -> np.ndarray:
        """Upper gram matrix of Q restricted to span(basis) in that basis."""
        F = self.ctx
        basis = as_rows(basis, self.D)
        P = self.pairing(basis, basis)
        return upper_from_values(F, self.Q_many(basis), P)

    def restrict(self, w: Subspace) -> tuple["QuadForm", bool]:
        form = QuadForm(self.ctx, self.gram_in_basis(w.basis))
        return form, form.is_nondegenerate()

    def is_isometry(self, g) -> bool:
        F = self.ctx
        g = g.a if isinstance(g, Mat) else np.asarray(g)
        if not np.array_equal(F.matmul(F.matmul(g.T, self.bilinear), g), self.bilinear):
            return False
        return np.array_equal(self.Q_many(g.T), np.diag(self.gram_upper))


def _anisotropic_delta(F: FieldCtx) -> int:
    """Smallest delta with x^2 + xy + delta y^2 anisotropic."""
    for d in range(F.q):
        if F.p == 2:
            if F.trace(d) == 1:
                return d
        else:
            disc = F.s_sub(1, F.s_mul(4 % F.p, d))
            if disc and not F.is_square(disc):
                return d
    raise AssertionError("no anisotropic plane found")


class QuadSpace(QuadForm):
    """A nondegenerate quadratic space."""

    def __init__(self, ctx: FieldCtx, gram_upper, *, eta=None, name: str | None = None,
                 lagrangian=None):
        super().__init__(ctx, gram_upper)
        if not self.is_nondegenerate():
            raise DegenerateForm("quadratic form is degenerate")
        if self.D % 2 == 0:
            if eta is None:
                eta = witt_type(self)
        else:
            eta = None
        self.eta = eta
        self.name = name
        self._lagrangian = lagrangian

    @property
    def kind(self) -> str:
        if self.eta is None:
            return "odd"
        return "split" if self.eta == 1 else "nonsplit"

    @property
    def descriptor(self) -> str:
        if self.eta is None:
            return f"D{self.D}"
        return f"D{self.D}{'+' if self.eta == 1 else '-'}"

    def __repr__(self):
        return f"QuadSpace({self.descriptor}, GF({self.ctx.q}))"

    @property
    def reference_lagrangian(self) -> Subspace:
        """A fixed maximal totally singular subspace when eta = +1."""
        if self.eta != 1:
            raise ValueError("only split even-dimensional spaces have a Lagrangian")
        if self._lagrangian is None:
            es, _, _ = witt_decomposition(self)
            self._lagrangian = Subspace(self.ctx, self.D, np.array(es).reshape(-1, self.D))
        return self._lagrangian

    def quotient_form(self, L: Subspace) -> tuple["QuadSpace", Quotient]:
        """The form induced on L^perp / L, with the quotient coordinates."""
        if not self.is_totally_singular(L):
            raise ValueError("L is not totally singular")
        Lp = self.perp(L)
        if not L.issubset(Lp):
            raise ValueError("L is not contained in its perp")
        quo = Quotient(Lp, L)
        C = quo.complement
        gram = self.gram_in_basis(C)
        # Q is constant on cosets: it vanishes on L and L pairs to zero with L^perp
        if L.dim and self.pairing(C, L.basis).any():
            raise AssertionError("induced form is not well defined")
        eta = self.eta if gram.shape[0] % 2 == 0 else None
        return QuadSpace(self.ctx, gram, eta=eta), quo


def find_singular(form: QuadForm, basis) -> np.ndarray | None:
    """A nonzero singular vector in span(basis), scanning in counting order."""
    F = form.ctx
    basis = np.asarray(basis, dtype=np.int64)
    n = basis.shape[0]
    q = F.q
    block = 4096
    total = q ** n
    for start in range(1, total, block):
        idx = np.arange(start, min(total, start + block), dtype=np.int64)
        coeffs = np.empty((idx.size, n), dtype=np.int64)
        t = idx.copy()
        for i in range(n):
            coeffs[:, i] = t % q
            t //= q
        vecs = F.matmul(coeffs, basis)
        vals = form.Q_many(vecs)
        hit = np.flatnonzero(vals == 0)
        if hit.size:
            return vecs[hit[0]]
    return None


def witt_decomposition(form: QuadForm):
    """Greedy split into hyperbolic pairs plus an anisotropic remainder.

    Returns (es, fs, rest) as lists of vectors with <e_i,f_i> = 1,
    Q(e_i) = Q(f_i) = 0 and rest spanning the orthogonal anisotropic part.
    """
    F = form.ctx
    D = form.D
    es, fs = [], []
    if D == 0:
        return es, fs, []
    cur = np.eye(D, dtype=np.int64)
    while True:
        sub = Subspace(F, D, cur)
        restricted = QuadForm(F, form.gram_in_basis(sub.basis))
        # radical part of the current piece is carried along untouched
        nondeg_dim = sub.dim - restricted.radical.dim
        if nondeg_dim < 2 or sub.dim < 2:
            break
        v = find_singular(form, sub.basis)
        if v is None:
            break
        pv = form.pairing(v[None, :], sub.basis)[0]
        if not pv.any():
            # v lies in the radical of this piece; if Q(v)=0 the form is degenerate
            break
        j = int(np.flatnonzero(pv)[0])
        w = F.mul(sub.basis[j], F.inv_table[pv[j]])   # <v, w> = 1
        # make w singular: w - Q(w) v
        w = F.sub(w, F.mul(v, form.Q(w)))
        es.append(v)
        fs.append(w)
        plane = Subspace(F, D, np.vstack([v, w]))
        cur_sub = sub & form.perp(plane)
        cur = cur_sub.basis
        if cur_sub.dim == 0:
            cur = np.zeros((0, D), dtype=np.int64)
            break
    rest = [row for row in np.asarray(cur).reshape(-1, D)]
    return es, fs, rest


def witt_type(form: QuadForm) -> int:
    if form.D % 2:
        raise ValueError("Witt type is defined for even dimension only")
    if form.D == 0:
        return 1
    es, _, rest = witt_decomposition(form)
    return 1 if 2 * len(es) == form.D else -1


def standard_gram(F: FieldCtx, D: int, kind: str) -> np.ndarray:
    if kind == "odd":
        if D % 2 == 0:
            raise ValueError("odd model needs odd D")
    elif kind in ("split", "nonsplit"):
        if D % 2 or D < (2 if kind == "nonsplit" else 0):
            raise ValueError(f"{kind} model needs even D")
    else:
        raise ValueError(f"unknown type {kind!r}")
    M = np.zeros((D, D), dtype=np.int64)
    planes = D // 2
    for i in range(planes):
        M[2 * i, 2 * i + 1] = 1
    if kind == "nonsplit":
        i = 2 * (planes - 1)
        M[i, i] = 1
        M[i + 1, i + 1] = _anisotropic_delta(F)
    elif kind == "odd":
        M[D - 1, D - 1] = 1
    return M


def standard_space(ctx: FieldCtx, D: int, kind: str) -> QuadSpace:
    M = standard_gram(ctx, D, kind)
    eta = {"split": 1, "nonsplit": -1, "odd": None}[kind]
    lag = None
    if kind == "split":
        lag = Subspace(ctx, D, np.eye(D, dtype=np.int64)[0::2])
    return QuadSpace(ctx, M, eta=eta, lagrangian=lag)


_DESC = re.compile(r"^D(\d+)([+-]?)$")


def parse_descriptor(desc: str) -> tuple[int, str]:
    m = _DESC.match(desc.strip())
    if not m:
        raise ValueError(f"bad space descriptor {desc!r} (expected e.g. D4+, D4-, D3)")
    D, sign = int(m.group(1)), m.group(2)
    if D % 2:
        if sign:
            raise ValueError(f"odd dimension takes no sign: {desc!r}")
        return D, "odd"
    if not sign:
        raise ValueError(f"even dimension needs a sign: {desc!r}")
    return D, "split" if sign == "+" else "nonsplit"


def space_from_descriptor(desc: str, q: int) -> QuadSpace:
    D, kind = parse_descriptor(desc)
    return standard_space(field_of_order(q), D, kind)


def perp(s: QuadForm, w: Subspace) -> Subspace:
    return s.perp(w)


def restrict(s: QuadForm, w: Subspace):
    return s.restrict(w)


def quotient_form(s: QuadSpace, L: Subspace):
    return s.quotient_form(L)


def all_singular_count(form: QuadForm) -> int:
    vals = form.Q_many(all_vectors(form.ctx.q, form.D))
    return int((vals == 0).sum())
