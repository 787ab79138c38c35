"""Q-filtrations, the canonical filtration of a nilpotent N, adaptedness and labels."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gf import FieldCtx
from .linalg import Subspace, inverse, mat_pow, rank
from .nilpotent import (InvariantViolation, NilpotentWitness, nilpotency_index, reduce_once,
                        satisfies_twist)
from .quadspace import QuadForm, QuadSpace, upper_from_values


# ---------------------------------------------------------------- filtrations

class QFiltration:
    """A descending chain X^{>=a}: V below `start`, chain[i] at start + i, 0 above."""

    def __init__(self, space: QuadSpace, start: int, chain):
        F, D = space.ctx, space.D
        full = Subspace.full(F, D)
        zero = Subspace.zero(F, D)
        chain = list(chain)
        while chain and chain[0] == full:
            chain.pop(0)
            start += 1
        while chain and chain[-1] == zero:
            chain.pop()
        if not chain and D == 0:
            start = 1
        self.space = space
        self.start = start
        self.chain = tuple(chain)
        for hi, lo in zip(self.chain[1:], self.chain):
            if not hi.issubset(lo):
                raise ValueError("filtration is not descending")

    @property
    def end(self) -> int:
        """First degree with X^{>=a} = 0."""
        return self.start + len(self.chain)

    def X(self, a: int) -> Subspace:
        if a < self.start:
            return Subspace.full(self.space.ctx, self.space.D)
        if a >= self.end:
            return Subspace.zero(self.space.ctx, self.space.D)
        return self.chain[a - self.start]

    def degrees(self):
        """Degrees a with f_a possibly nonzero, ascending."""
        return range(self.start - 1, self.end)

    def f(self, a: int) -> int:
        return self.X(a).dim - self.X(a + 1).dim

    @cached_property
    def dims(self) -> dict:
        return {a: self.f(a) for a in self.degrees() if self.f(a)}

    def __eq__(self, other):
        if not isinstance(other, QFiltration):
            return NotImplemented
        return self.start == other.start and self.chain == other.chain

    def __hash__(self):
        return hash((self.start, self.chain))

    def __repr__(self):
        return f"QFiltration(start={self.start}, dims={self.dims})"

    def is_q_filtration(self) -> bool:
        s = self.space
        top = max(self.end, 1 - self.start + 1, 1)
        for a in range(1, top + 1):
            Xa = self.X(a)
            if not s.is_totally_singular(Xa):
                return False
            if self.X(1 - a) != s.perp(Xa):
                return False
        return True

    def shifted(self, k: int) -> "QFiltration":
        """Same chain with every degree moved by k (used to corrupt a filtration)."""
        return QFiltration(self.space, self.start + k, self.chain)


def is_q_filtration(filt: QFiltration) -> bool:
    return filt.is_q_filtration()


# ---------------------------------------------------------------- canonical filtration

def canonical_chain(s: QuadSpace, N, keep_shift: bool = True):
    """(start, list of subspaces) of the canonical filtration, by reduction to L^perp/L."""
    F = s.ctx
    e = nilpotency_index(F, N)
    if e == 0:
        return 1, []
    red = reduce_once(s, N, e)
    sub_start, sub_chain = canonical_chain(red.space, red.N, keep_shift)
    Dp = red.space.D

    def sub_at(a):
        if a < sub_start:
            return np.eye(Dp, dtype=np.int64)
        if a >= sub_start + len(sub_chain):
            return np.zeros((0, Dp), dtype=np.int64)
        return sub_chain[a - sub_start].basis

    if red.lam_nonzero and keep_shift:
        lo, hi = 1 - e, e
    else:
        lo, hi = 2 - e, e - 1
    return lo, [red.quotient.pullback(sub_at(a)) for a in range(lo, hi + 1)]


def canonical_filtration(w, N=None, keep_shift: bool = True, check: bool = True) -> QFiltration:
    """Canonical filtration of a witness, or of (space, N)."""
    if isinstance(w, NilpotentWitness):
        s, N = w.space, w.N
    else:
        s = w
        N = np.asarray(N, dtype=np.int64)
    start, chain = canonical_chain(s, N, keep_shift)
    filt = QFiltration(s, start, chain)
    if check:
        if not filt.is_q_filtration():
            raise InvariantViolation("canonical filtration violates the Q-filtration law")
        if not shifts_by_two(filt, N):
            raise InvariantViolation("N does not raise the canonical filtration by 2")
    return filt


def shifts_by_two(filt: QFiltration, N) -> bool:
    for a in range(filt.start - 2, filt.end):
        Xa = filt.X(a)
        if Xa.dim and not Xa.apply(N).issubset(filt.X(a + 2)):
            return False
    return True


# ---------------------------------------------------------------- graded model

class GradedModel:
    """A graded space gr = sum gr^a with a compatible quadratic form, in block coordinates.

    `slices[a]` indexes the coordinates of gr^a; `gram` is the upper gram matrix.
    """

    def __init__(self, ctx: FieldCtx, dims: dict, gram):
        self.ctx = ctx
        self.dims = {a: d for a, d in sorted(dims.items()) if d}
        self.slices = {}
        pos = 0
        for a, d in self.dims.items():
            self.slices[a] = slice(pos, pos + d)
            pos += d
        self.D = pos
        self.form = QuadForm(ctx, gram)

    def f(self, a):
        return self.dims.get(a, 0)

    def block(self, M, b, a):
        """Block of M mapping gr^a to gr^b."""
        if a not in self.slices or b not in self.slices:
            return None
        return M[self.slices[b], self.slices[a]]

    def degree_two_mask(self) -> np.ndarray:
        mask = np.zeros((self.D, self.D), dtype=bool)
        for a in self.slices:
            if a + 2 in self.slices:
                mask[self.slices[a + 2], self.slices[a]] = True
        return mask

    def in_E2(self, T) -> bool:
        F = self.ctx
        T = np.asarray(T, dtype=np.int64)
        if T[~self.degree_two_mask()].any():
            return False
        B = self.form.bilinear
        BT = F.matmul(B, T)
        if F.add(BT, BT.T).any():
            return False
        if -1 in self.slices:
            sl = self.slices[-1]
            if np.diag(BT[sl, sl]).any():
                return False
        return True

    def star_conditions(self, T) -> bool:
        """The nondegeneracy conditions defining E^2_* (T already in E^2)."""
        F = self.ctx
        T = np.asarray(T, dtype=np.int64)
        B = self.form.bilinear
        for a in sorted(self.dims):
            if a > 0 or self.dims[a] == 0:
                continue
            m = -a
            cols = np.zeros((self.D, self.dims[a]), dtype=np.int64)
            cols[self.slices[a], :] = np.eye(self.dims[a], dtype=np.int64)
            if m % 2 == 0:
                Y = F.matmul(mat_pow(F, T, m // 2), cols).T     # rows T^{m/2} x
                gram = upper_from_values(F, self.form.Q_many(Y), self.form.pairing(Y, Y))
                if not QuadForm(F, gram).is_nondegenerate():
                    return False
            else:
                G = F.matmul(cols.T, F.matmul(B, F.matmul(mat_pow(F, T, m), cols)))
                if rank(F, G) != self.dims[a]:
                    return False
        return True

    def in_E2_star(self, T) -> bool:
        return self.in_E2(T) and self.star_conditions(T)

    def kernel_dims(self, T) -> dict:
        """dim ker(T^a : gr^{-a} -> gr^a) for a >= 1."""
        F = self.ctx
        out = {}
        for a in sorted(self.dims):
            if a >= 0:
                continue
            m = -a
            cols = np.zeros((self.D, self.dims[a]), dtype=np.int64)
            cols[self.slices[a], :] = np.eye(self.dims[a], dtype=np.int64)
            img = F.matmul(mat_pow(F, T, m), cols)
            out[m] = self.dims[a] - rank(F, img)
        return out


def graded_standard_model(ctx: FieldCtx, dims: dict, zero_kind: str | None) -> GradedModel:
    """gr with gr^{-a}, gr^a dually paired and a standard form of the given kind on gr^0."""
    from .quadspace import standard_gram
    dims = {a: d for a, d in dims.items() if d}
    D = sum(dims.values())
    g = GradedModel(ctx, dims, np.zeros((D, D), dtype=np.int64))
    M = np.zeros((D, D), dtype=np.int64)
    for a, sl in g.slices.items():
        if a < 0:
            tgt = g.slices[-a]
            M[sl, tgt] = np.eye(dims[a], dtype=np.int64)
        elif a == 0:
            M[sl, sl] = standard_gram(ctx, dims[0], zero_kind)
    return GradedModel(ctx, dims, M)


@dataclass
class GradedView:
    """Representatives for gr X^* inside V and the induced objects."""
    filt: QFiltration
    comps: dict            # degree -> rows spanning a complement of X^{>=a+1} in X^{>=a}
    basis: np.ndarray      # D x D, rows ordered by ascending degree
    coord: np.ndarray      # coord @ v gives block coordinates of v
    model: GradedModel

    @classmethod
    def of(cls, filt: QFiltration) -> "GradedView":
        s = filt.space
        F = s.ctx
        comps = {}
        for a in filt.degrees():
            big = filt.X(a)
            small = filt.X(a + 1)
            if big.dim == small.dim:
                continue
            acc = small.basis
            rows = []
            for v in big.basis:
                trial = np.vstack([acc, v[None, :]])
                if rank(F, trial) > acc.shape[0]:
                    acc = trial
                    rows.append(v)
            comps[a] = np.array(rows, dtype=np.int64)
        order = sorted(comps)
        basis = np.vstack([comps[a] for a in order]) if order else np.zeros((0, s.D), dtype=np.int64)
        coord = inverse(F, basis.T) if s.D else np.zeros((0, 0), dtype=np.int64)
        dims = {a: comps[a].shape[0] for a in order}
        D = s.D
        gram = np.zeros((D, D), dtype=np.int64)
        tmp = GradedModel(F, dims, gram)
        for a in order:
            if a == 0:
                C = comps[0]
                gram[tmp.slices[0], tmp.slices[0]] = s.gram_in_basis(C)
            elif a < 0 and -a in comps:
                gram[tmp.slices[a], tmp.slices[-a]] = s.pairing(comps[a], comps[-a])
        return cls(filt, comps, basis, coord, GradedModel(F, dims, gram))

    def bar(self, N) -> np.ndarray:
        """N-bar in block coordinates (only blocks gr^a -> gr^{a+2} kept)."""
        F = self.filt.space.ctx
        full = F.matmul(self.coord, F.matmul(N, self.basis.T))
        out = np.zeros_like(full)
        mask = self.model.degree_two_mask()
        out[mask] = full[mask]
        return out

    def lower_part_vanishes(self, N) -> bool:
        """Block-lower part (degree shift below 2) of N is zero."""
        F = self.filt.space.ctx
        full = F.matmul(self.coord, F.matmul(N, self.basis.T))
        sl = self.model.slices
        for a in sl:
            for b in sl:
                if b < a + 2 and full[sl[b], sl[a]].any():
                    return False
        return True


def adaptedness(filt: QFiltration, N) -> dict:
    """Each condition of N-adaptedness separately."""
    s = filt.space
    N = np.asarray(N, dtype=np.int64)
    out = {"q_filtration": filt.is_q_filtration()}
    out["twisted_nilpotent"] = nilpotency_index(s.ctx, N) >= 0 and satisfies_twist(s, N)
    out["raises_by_two"] = shifts_by_two(filt, N)
    if not (out["q_filtration"] and out["raises_by_two"]):
        out["graded_E2"] = out["graded_star"] = False
        return out
    view = GradedView.of(filt)
    T = view.bar(N)
    out["graded_E2"] = view.model.in_E2(T)
    out["graded_star"] = out["graded_E2"] and view.model.star_conditions(T)
    return out


def is_adapted(filt: QFiltration, w, strict: bool = False) -> bool:
    N = w.N if isinstance(w, NilpotentWitness) else np.asarray(w, dtype=np.int64)
    report = adaptedness(filt, N)
    if strict and not report["q_filtration"]:
        raise ValueError("not a Q-filtration")
    return all(report.values())


# ---------------------------------------------------------------- enumeration of Q-filtrations

def enumerate_subspaces(F: FieldCtx, n: int, k: int):
    """All k-dimensional subspaces of GF(q)^n as RREF bases."""
    q = F.q
    for piv in itertools.combinations(range(n), k):
        free = [(i, c) for i, p in enumerate(piv) for c in range(p + 1, n) if c not in piv]
        for vals in itertools.product(range(q), repeat=len(free)):
            M = np.zeros((k, n), dtype=np.int64)
            for i, p in enumerate(piv):
                M[i, p] = 1
            for (i, c), v in zip(free, vals):
                M[i, c] = v
            yield M


def subspaces_of(W: Subspace, k: int):
    F = W.ctx
    for M in enumerate_subspaces(F, W.dim, k):
        yield Subspace(F, W.D, F.matmul(M, W.basis) if k else np.zeros((0, W.D), dtype=np.int64))


def totally_singular_subspaces(s: QuadForm, k: int):
    for W in subspaces_of(Subspace.full(s.ctx, s.D), k):
        if s.is_totally_singular(W):
            yield W


def all_q_filtrations(s: QuadSpace, max_degree: int, guard: int = 200_000) -> list[QFiltration]:
    """Every Q-filtration with X^{>=a} = 0 for a > max_degree.

    The positive part is any descending chain of totally singular subspaces;
    the rest is forced by X^{>=1-a} = (X^{>=a})^perp.
    """
    D = s.D
    out = []

    def extend(chain, depth):
        if len(out) > guard:
            raise RuntimeError("Q-filtration enumeration exceeds guard")
        if depth == max_degree:
            out.append(_from_positive(s, chain))
            return
        last = chain[-1]
        for k in range(last.dim + 1):
            for W in subspaces_of(last, k):
                extend(chain + [W], depth + 1)

    maxk = D // 2
    for k in range(maxk + 1):
        for W in totally_singular_subspaces(s, k):
            if max_degree >= 1:
                extend([W], 1)
            elif k == 0:
                out.append(_from_positive(s, []))
    return list(dict.fromkeys(out))


def _from_positive(s: QuadSpace, pos) -> QFiltration:
    """Filtration with X^{>=a} = pos[a-1] for a >= 1 and perps below."""
    M = len(pos)
    neg = [s.perp(pos[-a]) for a in range(1 - M, 1)]     # X^{>=a} = (X^{>=1-a})^perp
    return QFiltration(s, 1 - M, neg + list(pos))


class FiltrationCatalog:
    """All Q-filtrations up to a degree bound, with data for fast adaptedness tests."""

    def __init__(self, s: QuadSpace, max_degree: int):
        self.space = s
        self.max_degree = max_degree
        self.filtrations = all_q_filtrations(s, max_degree)
        self._shift_data = []
        F = s.ctx
        for filt in self.filtrations:
            data = []
            for a in range(filt.start - 2, filt.end):
                Xa = filt.X(a)
                target = filt.X(a + 2)
                if Xa.dim == 0 or target.dim == s.D:
                    continue
                ann = _annihilator(F, target)
                data.append((Xa.basis, ann))
            self._shift_data.append(data)

    def __len__(self):
        return len(self.filtrations)

    def adapted_indices(self, N) -> list[int]:
        F = self.space.ctx
        out = []
        for i, (filt, data) in enumerate(zip(self.filtrations, self._shift_data)):
            ok = True
            for basis, ann in data:
                if F.matmul(ann, F.matmul(N, basis.T)).any():
                    ok = False
                    break
            if ok and is_adapted(filt, N):
                out.append(i)
        return out


def _annihilator(F, W: Subspace) -> np.ndarray:
    """Rows a with a . w = 0 for w in W (so W = kernel of these rows)."""
    from .linalg import nullspace
    if W.dim == 0:
        return np.eye(W.D, dtype=np.int64)
    return nullspace(F, W.basis)


def degree_bound(D: int) -> int:
    """Adapted filtrations vanish above degree 2D - 2 (see verify_uniqueness)."""
    return max(1, 2 * D - 2)


def top_degree_bound(e: int) -> int:
    """No filtration adapted to N has gr^a != 0 for |a| above this.

    Odd a needs N^a != 0 on gr^{-a}, even a needs N^{a/2} != 0 there.
    """
    return max(0, 2 * e - 2, e - 1)


def adapted_filtrations(s: QuadSpace, N, guard: int = 2_000_000) -> list[QFiltration]:
    """All Q-filtrations adapted to N, by exhaustive search over totally singular flags.

    Positive parts are built from the top degree down; a flag is abandoned as
    soon as N X^{>=a} is not inside X^{>=a+2}, which every adapted filtration
    satisfies. Survivors are tested in full.
    """
    F, D = s.ctx, s.D
    N = np.asarray(N, dtype=np.int64)
    M = top_degree_bound(nilpotency_index(F, N))
    zero = Subspace.zero(F, D)
    found = []
    visited = [0]

    def preimage(W: Subspace) -> Subspace:
        # {x : N x in W}
        if W.dim == D:
            return Subspace.full(F, D)
        ann = _annihilator(F, W)
        from .linalg import nullspace
        return Subspace(F, D, nullspace(F, F.matmul(ann, N)))

    def descend(a, above):
        # above[k] = X^{>=a+1+k}
        visited[0] += 1
        if visited[0] > guard:
            raise RuntimeError("adapted filtration search exceeds guard")
        if a == 0:
            filt = _from_positive(s, above) if above else QFiltration(s, 1, [])
            if is_adapted(filt, N):
                found.append(filt)
            return
        cur = above[0] if above else zero
        two_up = above[1] if len(above) > 1 else zero
        room = preimage(two_up) & s.perp(cur)
        from .linalg import Quotient
        quo = Quotient(room, cur)
        for k in range(quo.dim + 1):
            if cur.dim + k > D // 2:
                break
            for sub in enumerate_subspaces(F, quo.dim, k):
                W = quo.pullback(sub)
                if k and not s.is_totally_singular(W):
                    continue
                descend(a - 1, [W] + above)

    descend(M, [])
    return list(dict.fromkeys(found))


def verify_uniqueness(w, catalog: FiltrationCatalog | None = None) -> bool:
    """Exactly one Q-filtration is adapted to N, and it is the canonical one.

    With a catalog every Q-filtration in it is tested; otherwise the pruned
    search of adapted_filtrations is used.
    """
    s = w.space
    if not (s.D <= 4 or (s.D <= 6 and s.ctx.q == 2)):
        raise RuntimeError("exhaustive uniqueness check is limited to D <= 4, or D <= 6 with q = 2")
    if catalog is not None:
        hits = [catalog.filtrations[i] for i in catalog.adapted_indices(w.N)]
    else:
        hits = adapted_filtrations(s, w.N)
    return len(hits) == 1 and hits[0] == canonical_filtration(w)


# ---------------------------------------------------------------- labels

@dataclass(frozen=True)
class PieceLabel:
    """Graded dimensions (f_{-M}, ..., f_M) and, for f_0 = 0 in even D, a component."""
    f: tuple
    component: int | None = None

    @classmethod
    def from_dims(cls, dims: dict, component=None) -> "PieceLabel":
        M = max((abs(a) for a, d in dims.items() if d), default=0)
        return cls(tuple(dims.get(a, 0) for a in range(-M, M + 1)), component)

    @property
    def M(self) -> int:
        return (len(self.f) - 1) // 2

    def at(self, a: int) -> int:
        if abs(a) > self.M:
            return 0
        return self.f[a + self.M]

    @property
    def dims(self) -> dict:
        return {a: self.at(a) for a in range(-self.M, self.M + 1) if self.at(a)}

    @property
    def D(self) -> int:
        return sum(self.f)

    def is_admissible(self) -> bool:
        if any(self.at(a) != self.at(-a) for a in range(self.M + 1)):
            return False
        evens = [self.at(a) for a in range(0, self.M + 1, 2)]
        odds = [self.at(a) for a in range(1, self.M + 1, 2)]
        if any(x < y for x, y in zip(evens, evens[1:])):
            return False
        if any(x < y for x, y in zip(odds, odds[1:])):
            return False
        return all(x % 2 == 0 for x in odds)

    def __str__(self):
        body = "(" + ",".join(map(str, self.f)) + ")"
        return body if self.component is None else f"j={self.component}:{body}"

    def sort_key(self):
        return (-self.at(0), self.M, self.f, -1 if self.component is None else self.component)


def admissible_labels(D: int, eta: int | None) -> list[PieceLabel]:
    """All admissible labels of total dimension D for the given type (None for odd D)."""
    out = []

    def chains(total, first_max, step_even):
        # nonincreasing sequences of positive parts (values even when step_even)
        if total == 0:
            yield []
            return
        for v in range(min(first_max, total), 0, -1):
            if step_even and v % 2:
                continue
            for rest in chains(total - v, v, step_even):
                yield [v] + rest

    for f0 in range(D % 2, D + 1, 2):
        rem = (D - f0) // 2                     # sum of f_a over a >= 1
        for even_part in range(rem + 1):
            odd_part = rem - even_part
            for ev in chains(even_part, f0, False):
                for od in chains(odd_part, D, True):
                    dims = {0: f0}
                    for i, v in enumerate(ev, start=1):
                        dims[2 * i] = dims[-2 * i] = v
                    for i, v in enumerate(od):
                        dims[2 * i + 1] = dims[-2 * i - 1] = v
                    lab = PieceLabel.from_dims(dims)
                    if not lab.is_admissible():
                        continue
                    if D % 2 == 0 and f0 == 0:
                        if eta == 1:
                            out += [PieceLabel(lab.f, 0), PieceLabel(lab.f, 1)]
                    else:
                        out.append(lab)
    return sorted(set(out), key=PieceLabel.sort_key)


def component_of(s: QuadSpace, S: Subspace) -> int:
    """Which of the two families of maximal totally singular subspaces S lies in."""
    ref = s.reference_lagrangian
    return (ref.dim - (ref & S).dim) % 2


def piece_label(filt: QFiltration) -> PieceLabel:
    s = filt.space
    dims = filt.dims
    comp = None
    if s.D % 2 == 0 and dims.get(0, 0) == 0 and s.D > 0:
        if s.eta != 1:
            raise InvariantViolation("f_0 = 0 in a nonsplit space")
        comp = component_of(s, filt.X(1))
    return PieceLabel.from_dims(dims, comp)


@dataclass(frozen=True)
class ClassLabel:
    piece: PieceLabel
    S: tuple          # blocks of the partition of the index set, each a sorted tuple

    def __str__(self):
        parts = "|".join(",".join(map(str, b)) for b in self.S)
        return f"{self.piece} S={{{parts}}}"


def class_label(filt: QFiltration, N) -> ClassLabel:
    """Piece label refined by which odd-dimensional images share a radical (char 2, f_0 > 0)."""
    s = filt.space
    F = s.ctx
    if F.p != 2:
        raise ValueError("class labels are defined in characteristic 2")
    lab = piece_label(filt)
    if lab.at(0) == 0:
        raise ValueError("class labels need f_0 > 0")
    N = N.N if isinstance(N, NilpotentWitness) else np.asarray(N, dtype=np.int64)
    view = GradedView.of(filt)
    model = view.model
    T = view.bar(N)
    sl0 = model.slices[0]
    B0 = model.form.bilinear[sl0, sl0]
    radicals = {}
    for a in range(0, lab.M + 1, 2):
        i = lab.at(a)
        if i % 2 == 0:
            continue
        cols = np.zeros((model.D, i), dtype=np.int64)
        cols[model.slices[-a], :] = np.eye(i, dtype=np.int64)
        Z = F.matmul(mat_pow(F, T, a // 2), cols)[sl0, :].T     # rows in gr^0 coordinates
        G = F.matmul(Z, F.matmul(B0, Z.T))
        from .linalg import nullspace
        rad = nullspace(F, G)
        if rad.shape[0] != 1:
            raise InvariantViolation("odd-dimensional image without a one-dimensional radical")
        Li = Subspace(F, lab.at(0), F.matmul(rad, Z))
        if i in radicals and radicals[i] != Li:
            raise InvariantViolation("radical depends on the choice of degree")
        radicals[i] = Li
    keys = sorted(radicals)
    blocks = []
    for i in keys:
        for b in blocks:
            if radicals[b[0]] == radicals[i]:
                b.append(i)
                break
        else:
            blocks.append([i])
    return ClassLabel(lab, tuple(tuple(b) for b in blocks))


# ---------------------------------------------------------------- splitting and lifting

def split_filtration(filt: QFiltration) -> dict:
    """Graded decomposition V = sum X^a compatible with the filtration and the form."""
    s = filt.space
    F = s.ctx
    D = s.D
    pieces = {}
    W = Subspace.full(F, D)
    top = filt.end - 1
    for a in range(top, 0, -1):
        Xa = filt.X(a) & W
        Xa1 = filt.X(a + 1) & W
        if Xa.dim == Xa1.dim:
            continue
        # complement of X^{>=a+1} inside X^{>=a} (within W)
        acc = Xa1.basis
        T = []
        for v in Xa.basis:
            trial = np.vstack([acc, v[None, :]])
            if rank(F, trial) > acc.shape[0]:
                acc = trial
                T.append(v)
        T = np.array(T, dtype=np.int64)
        k = T.shape[0]
        # dual vectors in W orthogonal to X^{>=a+1} and to the other new vectors' duals
        ann = Subspace(F, D, np.vstack([Xa1.basis, np.zeros((0, D), dtype=np.int64)])) if Xa1.dim \
            else Subspace.zero(F, D)
        cand = W & s.perp(ann)
        # solve <t_i, c_j> = delta_ij with c_j in cand
        P = s.pairing(T, cand.basis)                 # k x dim cand
        C = []
        for j in range(k):
            rhs = np.zeros(k, dtype=np.int64)
            rhs[j] = 1
            from .linalg import Mat, solve
            sol = solve(Mat(F, P), rhs)
            if sol is None:
                raise InvariantViolation("no dual complement in the splitting")
            C.append(F.matmul(sol, cand.basis))
        C = np.array(C, dtype=np.int64)
        # make the complement totally singular
        qs = s.Q_many(C)
        pc = s.pairing(C, C)
        Cn = C.copy()
        for i in range(k):
            corr = F.mul(T[i], qs[i])
            for j in range(i + 1, k):
                corr = F.add(corr, F.mul(T[j], pc[i, j]))
            Cn[i] = F.sub(C[i], corr)
        pieces[a] = T
        pieces[-a] = Cn
        W = W & s.perp(Subspace(F, D, np.vstack([T, Cn])))
    pieces[0] = W.basis.copy()
    pieces = {a: v for a, v in sorted(pieces.items()) if v.shape[0]}
    _check_split(filt, pieces)
    return pieces


def _check_split(filt, pieces):
    s = filt.space
    F = s.ctx
    for a, Xa in pieces.items():
        if a != 0 and not s.is_totally_singular(Subspace(F, s.D, Xa)):
            raise InvariantViolation("Q does not vanish on a nonzero degree piece")
        for b, Xb in pieces.items():
            if a + b != 0 and s.pairing(Xa, Xb).any():
                raise InvariantViolation("pieces of degrees not summing to zero pair nontrivially")
    for a in filt.degrees():
        rows = [v for b, v in pieces.items() if b >= a]
        span = Subspace(F, s.D, np.vstack(rows)) if rows else Subspace.zero(F, s.D)
        if span != filt.X(a):
            raise InvariantViolation("pieces do not rebuild the filtration")


def lift_to_filtration(T, pieces: dict, s: QuadSpace) -> np.ndarray:
    """An N in E^{>=2} with N-bar = T, built level by level from a splitting.

    T is given in the block coordinates of `pieces` (degrees ascending) and must
    lie in E^2 of the graded model. Returns N in standard coordinates.
    """
    F = s.ctx
    degs = sorted(pieces)
    sl = {}
    pos = 0
    for a in degs:
        sl[a] = slice(pos, pos + pieces[a].shape[0])
        pos += pieces[a].shape[0]
    D = pos
    basis = np.vstack([pieces[a] for a in degs])
    P = basis.T                                        # columns = split basis
    Bsp = F.matmul(P.T, F.matmul(s.bilinear, P))       # pairing in split coordinates
    Msp = s.gram_in_basis(basis)
    Nsp = np.zeros((D, D), dtype=np.int64)
    T = np.asarray(T, dtype=np.int64)
    for a in degs:
        if a + 2 in sl:
            Nsp[sl[a + 2], sl[a]] = T[sl[a + 2], sl[a]]

    def blk(M, b, a):
        return M[sl[b], sl[a]]

    kmax = (degs[-1] - degs[0]) if degs else 0
    for k in range(3, kmax + 1):
        for a in degs:
            for ap in degs:
                if -a - ap != k or a > ap:
                    continue
                # unknowns N^a_{-ap} : X^a -> X^{-ap} and N^{ap}_{-a} : X^{ap} -> X^{-a}
                if -ap not in sl or -a not in sl:
                    continue
                # right-hand side: -sum_b <N^a_b x, N^{ap}_{-b} y>
                rhs = np.zeros((pieces[a].shape[0], pieces[ap].shape[0]), dtype=np.int64)
                for b in degs:
                    if a + 2 <= b <= -ap - 2 and -b in sl:
                        left = blk(Nsp, b, a)            # X^a -> X^b
                        right = blk(Nsp, -b, ap)         # X^ap -> X^{-b}
                        pair = blk(Bsp, -b, b)           # <X^b, X^{-b}> (rows b, cols -b)
                        term = F.matmul(left.T, F.matmul(pair, right))
                        rhs = F.add(rhs, term)
                rhs = F.neg(rhs)
                if a != ap:
                    # N^a_{-ap} = 0; <x_a, N^{ap}_{-a} y> = rhs(x, y)
                    pair = blk(Bsp, a, -a)               # rows a, cols -a
                    X = F.matmul(inverse(F, pair), rhs)
                    Nsp[sl[-a], sl[ap]] = X
                else:
                    # <x, N^a_{-a} x> = -Q(N^a_0 x) - sum_{b<0} <N^a_b x, N^a_{-b} x>
                    n = pieces[a].shape[0]
                    quad = np.zeros((n, n), dtype=np.int64)
                    if 0 in sl:
                        Y = blk(Nsp, 0, a)               # X^a -> X^0
                        G0 = Msp[sl[0], sl[0]]
                        quad = F.add(quad, F.matmul(Y.T, F.matmul(G0, Y)))
                    for b in degs:
                        if b < 0 and a + 2 <= b <= -a - 2 and -b in sl:
                            left = blk(Nsp, b, a)
                            right = blk(Nsp, -b, a)
                            pair = blk(Bsp, b, -b)
                            quad = F.add(quad, F.matmul(left.T, F.matmul(pair, right)))
                    quad = F.neg(quad)
                    up = _upper_rep(F, quad)
                    pair = blk(Bsp, a, -a)
                    Nsp[sl[-a], sl[a]] = F.matmul(inverse(F, pair), up)
    Pinv = inverse(F, P)
    return F.matmul(P, F.matmul(Nsp, Pinv))


def _upper_rep(F, M):
    """Upper-triangular matrix defining the same quadratic form as M."""
    out = np.triu(M).copy()
    low = np.tril(M, -1)
    out = F.add(out, np.triu(low.T, 1))
    return out


# ---------------------------------------------------------------- model filtrations

def model_filtration(s: QuadSpace, label: PieceLabel) -> QFiltration:
    """A Q-filtration with the given graded dimensions built from a Witt basis."""
    from .quadspace import witt_decomposition
    F, D = s.ctx, s.D
    es, fs, rest = witt_decomposition(s)
    need = sum(label.at(a) for a in range(1, label.M + 1))
    if need > len(es):
        raise ValueError(f"label {label} does not fit in {s}")
    es, fs = list(es), list(fs)
    if label.component is not None:
        cur = component_of(s, Subspace(F, D, np.array(es)))
        if cur != label.component:
            es[-1], fs[-1] = fs[-1], es[-1]
    pos = {}
    i = 0
    for a in range(label.M, 0, -1):
        pos[a] = es[i:i + label.at(a)]
        pos[-a] = fs[i:i + label.at(a)]
        i += label.at(a)
    zero = es[i:] + fs[i:] + list(rest)
    chain = []
    for a in range(-label.M, label.M + 1):
        rows = [v for b in range(a, label.M + 1) for v in (pos.get(b, []) if b else zero)]
        chain.append(Subspace(F, D, np.array(rows, dtype=np.int64).reshape(-1, D)))
    filt = QFiltration(s, -label.M, chain)
    if not filt.is_q_filtration() or piece_label(filt) != label:
        raise InvariantViolation("model filtration has the wrong label")
    return filt


# ---------------------------------------------------------------- whole-space checks
# These live in census (they need the enumeration kernels); imported lazily to
# keep this module free of the kernel dependency.

def verify_theorem_1_7(s: QuadSpace, **kw):
    from .census import verify_theorem_1_7 as run
    return run(s, **kw)


def class_partition(s: QuadSpace, **kw):
    from .census import class_partition as run
    return run(s, **kw)


def nilpotent_shadow(s: QuadSpace, u):
    from .census import nilpotent_shadow as run
    return run(s, u)
