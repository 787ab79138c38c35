"""Nilpotent endomorphisms compatible with a quadratic form.

N belongs to the twisted set when Q(Nx) = -<x, Nx> for every x; then 1 + N is
an isometry. The invariants here (Jordan counts, the characteristic-2 bits
eps_i, the line L and the reduction to L^perp/L) drive the canonical
filtration.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import Mat, Quotient, Subspace, all_vectors, inverse, mat_pow, nullspace, rank
from .quadspace import QuadSpace

NOT_IN = "not_in"
IN_TCM = "in_tcm"
IN_CM = "in_cm"

ALL_VECTOR_LIMIT = 2 ** 16


class InvariantViolation(AssertionError):
    """An identity that must hold for every valid input failed."""


def _arr(N):
    return N.a if isinstance(N, Mat) else np.asarray(N, dtype=np.int64)


def nilpotency_index(F, N) -> int:
    """Least e with N^e = 0, taking e = 0 for N = 0; -1 if N is not nilpotent."""
    if not N.any():
        return 0
    P = N
    for e in range(1, N.shape[0] + 1):
        if not P.any():
            return e
        P = F.matmul(P, N)
    return -1


def _twist_defect(s: QuadSpace, N, X) -> np.ndarray:
    """Q(Nx) + <x, Nx> for each row x of X."""
    F = s.ctx
    NX = F.matmul(X, N.T)
    return F.add(s.Q_many(NX), F.sum(F.mul(F.matmul(X, s.bilinear), NX), axis=1))


def satisfies_twist(s: QuadSpace, N) -> bool:
    F = s.ctx
    D = s.D
    if F.q ** D <= ALL_VECTOR_LIMIT:
        X = all_vectors(F.q, D)
    else:
        eye = np.eye(D, dtype=np.int64)
        pairs = [F.add(eye[i], eye[j]) for i in range(D) for j in range(i + 1, D)]
        X = np.vstack([eye] + ([np.array(pairs)] if pairs else []))
    return not _twist_defect(s, N, X).any()


def membership(s: QuadSpace, N, check_so: bool = True) -> str:
    F = s.ctx
    N = _arr(N)
    if N.shape != (s.D, s.D):
        raise ValueError("matrix size does not match the space")
    if nilpotency_index(F, N) < 0 or not satisfies_twist(s, N):
        return NOT_IN
    if F.p == 2 and s.D % 2 == 0:
        in_cm = (s.D - rank(F, N)) % 2 == 0
    else:
        in_cm = True
    if check_so:
        from .groups import so_membership
        u = F.add(np.eye(s.D, dtype=np.int64), N)
        if so_membership(s, u) != in_cm:
            raise InvariantViolation("kernel parity and SO membership of 1+N disagree")
    return IN_CM if in_cm else IN_TCM


def jordan_data(F, N) -> tuple[int, tuple[int, ...]]:
    """(e, c) with c[i-1] the number of Jordan blocks of size i, for i = 1..D."""
    D = N.shape[0]
    ranks = [D]
    P = np.eye(D, dtype=np.int64)
    for _ in range(D + 1):
        P = F.matmul(P, N)
        ranks.append(rank(F, P))
    if ranks[-1]:
        raise ValueError("N is not nilpotent")
    c = tuple(ranks[i - 1] - 2 * ranks[i] + ranks[i + 1] for i in range(1, D + 1))
    e = 0 if ranks[1] == 0 else next(i for i, r in enumerate(ranks) if r == 0)
    return e, c


def dagger(F, N) -> np.ndarray:
    """(1 + N)^-1 - 1."""
    D = N.shape[0]
    eye = np.eye(D, dtype=np.int64)
    return F.sub(inverse(F, F.add(eye, N)), eye)


def lambda_functionals(s: QuadSpace, N):
    """For i = 1..D: (basis of ker N^i, values of lambda_i on it), char 2 only.

    lambda_i(x) = <x, N^(i-1) x>^(1/2); additivity is checked on basis pairs.
    """
    F = s.ctx
    if F.p != 2:
        raise ValueError("lambda_i is defined in characteristic 2")
    D = s.D
    out = []
    Npow = np.eye(D, dtype=np.int64)        # N^(i-1)
    for i in range(1, D + 1):
        K = nullspace(F, F.matmul(Npow, N))
        BK = F.matmul(K, s.bilinear)
        NK = F.matmul(K, Npow.T)
        sq = F.sum(F.mul(BK, NK), axis=1) if K.shape[0] else np.zeros(0, dtype=np.int64)
        vals = F.root_table[sq]
        for a in range(K.shape[0]):
            for b in range(a + 1, K.shape[0]):
                x = F.add(K[a], K[b])
                v = F.root_table[F.dot(F.matmul(x, s.bilinear), F.matmul(Npow, x))]
                if v != F.add(vals[a], vals[b]):
                    raise InvariantViolation("lambda_i is not additive")
        out.append((K, vals))
        Npow = F.matmul(Npow, N)
    return out


def eps_bits(s: QuadSpace, N) -> tuple[int, ...]:
    return tuple(int(vals.any()) for _, vals in lambda_functionals(s, N))


@dataclass
class NilpotentWitness:
    space: QuadSpace
    N: np.ndarray
    e: int
    c: tuple
    eps: tuple | None
    kind: str
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def ctx(self):
        return self.space.ctx

    @property
    def D(self):
        return self.space.D

    @property
    def dagger(self) -> np.ndarray:
        return dagger(self.ctx, self.N)

    @property
    def dim_ker(self) -> int:
        return self.D - rank(self.ctx, self.N)


def witness(s: QuadSpace, N, require_cm: bool = False) -> NilpotentWitness:
    N = _arr(N).copy()
    N.setflags(write=False)
    kind = membership(s, N)
    if kind == NOT_IN or (require_cm and kind != IN_CM):
        raise ValueError(f"matrix is not in the required nilpotent set ({kind})")
    e, c = jordan_data(s.ctx, N)
    eps = eps_bits(s, N) if s.ctx.p == 2 else None
    return NilpotentWitness(s, N, e, c, eps, kind)


def jordan_invariants(w: NilpotentWitness):
    return w.e, w.c


def lambda_eps(w: NilpotentWitness):
    return lambda_functionals(w.space, w.N), w.eps


# ---------------------------------------------------------------- the line L

def top_functional(s: QuadSpace, N, e: int) -> np.ndarray:
    """Coefficient vector of lambda_e on V = ker N^e (char 2)."""
    F = s.ctx
    Np = mat_pow(F, N, e - 1)
    return F.root_table[np.diag(F.matmul(s.bilinear, Np))]


def compute_line(s: QuadSpace, N, e: int | None = None) -> tuple[Subspace, bool]:
    """(L, lambda != 0) for N != 0; L = N^(e-1) V unless p = 2 and lambda_e != 0."""
    F = s.ctx
    D = s.D
    if e is None:
        e = nilpotency_index(F, N)
    if e < 1:
        raise ValueError("the line is defined for N != 0")
    if F.p == 2:
        ell = top_functional(s, N, e)
        if ell.any():
            ker_lam = Subspace(F, D, nullspace(F, ell[None, :]))
            K = s.perp(ker_lam)
            R = s.radical
            if R.dim == 0:
                if K.dim != 1:
                    raise InvariantViolation("(ker lambda)^perp is not a line")
                return K, True
            if K.dim != 2:
                raise InvariantViolation("(ker lambda)^perp is not a plane")
            r = R.basis[0]
            k = next(v for v in K.basis if not R.contains(v))
            x = F.add(F.mul(r, F.root_table[s.Q(k)]), F.mul(k, F.root_table[s.Q(r)]))
            return Subspace(F, D, x[None, :]), True
    Np = mat_pow(F, N, e - 1)
    return Subspace(F, D, Np.T), False


def check_line(s: QuadSpace, N, L: Subspace, lam: bool, e: int) -> None:
    F = s.ctx
    Lp = s.perp(L)
    if not L.issubset(Lp):
        raise InvariantViolation("L is not contained in L^perp")
    if F.matmul(L.basis, N.T).any():
        raise InvariantViolation("N L != 0")
    if not Lp.apply(N).issubset(Lp):
        raise InvariantViolation("N L^perp is not contained in L^perp")
    if not s.is_totally_singular(L):
        raise InvariantViolation("Q does not vanish on L")
    top = Subspace(F, s.D, mat_pow(F, N, e - 1).T)
    if not L.issubset(top + s.radical):
        raise InvariantViolation("L is not inside N^(e-1) V + R")
    if lam:
        if L.dim != 1:
            raise InvariantViolation("L is not a line although lambda != 0")
        if F.p == 2:
            inside = L.issubset(Lp.apply(mat_pow(F, N, e - 1)))
            if inside != (top.dim % 2 == 0):
                raise InvariantViolation("L in N^(e-1) L^perp does not match parity of N^(e-1) V")


def line_L(w: NilpotentWitness) -> Subspace:
    if w.ctx.p != 2:
        raise ValueError("line_L is the characteristic-2 construction; use line_L_odd_p")
    if w.e == 0:
        raise ValueError("N = 0 has no line")
    if w.kind != IN_CM:
        raise ValueError("N is not in the special nilpotent set")
    L, lam = compute_line(w.space, w.N, w.e)
    check_line(w.space, w.N, L, lam, w.e)
    return L


def line_L_odd_p(w: NilpotentWitness) -> Subspace:
    if w.ctx.p == 2:
        raise ValueError("line_L_odd_p needs odd characteristic")
    if w.e == 0:
        raise ValueError("N = 0 has no line")
    L, lam = compute_line(w.space, w.N, w.e)
    check_line(w.space, w.N, L, lam, w.e)
    return L


# ---------------------------------------------------------------- reduction

@dataclass
class Reduction:
    L: Subspace
    lam_nonzero: bool
    quotient: Quotient
    space: QuadSpace
    N: np.ndarray

    @property
    def ctx(self):
        return self.space.ctx


def reduce_once(s: QuadSpace, N, e: int | None = None, check: bool = False) -> Reduction:
    """L, V' = L^perp/L with its form, and the induced N'."""
    F = s.ctx
    if e is None:
        e = nilpotency_index(F, N)
    L, lam = compute_line(s, N, e)
    if check:
        check_line(s, N, L, lam, e)
    sp, quo = s.quotient_form(L)
    Nq = quo.induced(N)
    return Reduction(L, lam, quo, sp, Nq)


def reduce(w: NilpotentWitness) -> tuple[NilpotentWitness, Reduction]:
    if w.e == 0:
        raise ValueError("reduction needs N != 0")
    red = reduce_once(w.space, w.N, w.e, check=True)
    w2 = witness(red.space, red.N)
    if w2.kind != IN_CM:
        raise InvariantViolation("reduced map is not in the special nilpotent set")
    if red.space.D >= w.D:
        raise InvariantViolation("reduction did not lower the dimension")
    if w.ctx.p == 2:
        pc, pe = predict_reduced(w.c, w.eps, w.e, red.lam_nonzero)
        if _pad(w2.c, w.D) != pc or _pad(w2.eps, w.D) != pe:
            raise InvariantViolation("reduced invariants differ from the transition rules")
    elif w2.e > w.e - 1:
        raise InvariantViolation("reduction did not lower the nilpotency index")
    return w2, red


def _pad(t, n):
    t = tuple(t)
    return t + (0,) * (n - len(t))


def predict_reduced(c, eps, e: int, lam_nonzero: bool) -> tuple[tuple, tuple]:
    """Jordan counts and eps bits of N' from those of N (char 2, N != 0).

    c and eps are indexed from block size 1.
    """
    n = max(len(c), len(eps), e)
    c2 = list(_pad(c, n))
    eps2 = list(_pad(eps, n))

    def at(i):
        return i - 1

    if not lam_nonzero:
        ce = c2[at(e)]
        c2[at(e)] = 0
        if e > 2:
            c2[at(e - 2)] += ce
    elif c2[at(e)] % 2 == 0:
        c2[at(e)] -= 2
        c2[at(e - 1)] += 2
        eps2[at(e)] = 0
    else:
        c2[at(e)] -= 1
        if e > 2:
            c2[at(e - 2)] += 1
        eps2[at(e)] = 0
        if e > 2:
            eps2[at(e - 2)] = 1
    return tuple(c2), tuple(eps2)


# ---------------------------------------------------------------- W + Y

def wy_split(w: NilpotentWitness) -> tuple[Subspace, Subspace]:
    F = w.ctx
    s = w.space
    D, e, N = w.D, w.e, w.N
    if e == 0:
        raise ValueError("W + Y splitting needs N != 0")
    top = mat_pow(F, N, e - 1)
    K = Subspace(F, D, nullspace(F, top))
    # complement E of ker N^(e-1), extending its RREF basis greedily
    comp = []
    acc = K.basis
    for v in np.eye(D, dtype=np.int64):
        trial = np.vstack([acc, v[None, :]])
        if rank(F, trial) > acc.shape[0]:
            acc = trial
            comp.append(v)
    E = np.array(comp, dtype=np.int64).reshape(-1, D)
    G = s.pairing(E, F.matmul(E, top.T))
    if rank(F, G) != E.shape[0]:
        raise InvariantViolation("<x, N^(e-1) y> is degenerate on the complement")
    blocks = [E]
    for _ in range(e - 1):
        blocks.append(F.matmul(blocks[-1], N.T))
    stacked = np.vstack(blocks)
    if rank(F, stacked) != e * E.shape[0]:
        raise InvariantViolation("E + NE + ... is not a direct sum")
    W = Subspace(F, D, stacked)
    Y = s.perp(W)
    if not s.radical.issubset(Y):
        raise InvariantViolation("radical not inside Y")
    if not Y.apply(N).issubset(Y):
        raise InvariantViolation("Y is not N-stable")
    if Y.dim and F.matmul(Y.basis, top.T).any():
        raise InvariantViolation("N^(e-1) does not vanish on Y")
    if (W + Y).dim != D or (W & Y).dim != 0:
        raise InvariantViolation("V is not W + Y")
    return W, Y
