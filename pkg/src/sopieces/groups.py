"""Isometry groups of quadratic spaces: orders, generators, the Dickson
invariant, closures, orbits and enumeration of unipotent elements."""
from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from .gf import FieldCtx
from .linalg import Mat, determinant, inverse, rank, rref
from .quadspace import QuadForm, QuadSpace, witt_decomposition

CLOSURE_GUARD = 10 ** 7


class GuardExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------- orders

def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def orthogonal_order(D: int, q: int, eta: int | None) -> int:
    """Order of the full isometry group O_Q of a nondegenerate form."""
    if D % 2 == 0:
        n = D // 2
        if n == 0:
            return 1
        return 2 * q ** (n * (n - 1)) * (q ** n - eta) * _prod(q ** (2 * i) - 1 for i in range(1, n))
    n = D // 2
    base = q ** (n * n) * _prod(q ** (2 * i) - 1 for i in range(1, n + 1))
    return base if q % 2 == 0 else 2 * base


def so_order(D: int, q: int, eta: int | None) -> int:
    o = orthogonal_order(D, q, eta)
    if D % 2 and q % 2 == 0:
        return o
    return o // 2


def p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def space_orders(s: QuadSpace) -> tuple[int, int]:
    return orthogonal_order(s.D, s.ctx.q, s.eta), so_order(s.D, s.ctx.q, s.eta)


def unipotent_count(s: QuadSpace) -> int:
    """q^(dim - rank) = (p-part of |SO_Q|)^2."""
    return p_part(so_order(s.D, s.ctx.q, s.eta), s.ctx.p) ** 2


# ---------------------------------------------------------------- encoding

class MatrixCodec:
    """Injective encoding of D x D matrices over GF(q) as integers (base q)."""

    def __init__(self, q: int, D: int):
        self.q, self.D = q, D
        self.fits = q ** (D * D) <= 2 ** 64
        if self.fits:
            self.powers = np.array([q ** i for i in range(D * D)], dtype=np.uint64)

    def encode(self, mats) -> np.ndarray:
        mats = np.asarray(mats, dtype=np.int64).reshape(-1, self.D * self.D)
        if not self.fits:
            raise GuardExceeded("matrices too large for 64-bit keys")
        return (mats.astype(np.uint64) * self.powers).sum(axis=1, dtype=np.uint64)

    def encode_one(self, m) -> int:
        return int(self.encode(np.asarray(m)[None])[0])

    def decode(self, keys) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.uint64).copy()
        out = np.empty((keys.size, self.D * self.D), dtype=np.int64)
        q = np.uint64(self.q)
        for i in range(self.D * self.D):
            out[:, i] = (keys % q).astype(np.int64)
            keys //= q
        return out.reshape(-1, self.D, self.D)


def _arr(g):
    return g.a if isinstance(g, Mat) else np.asarray(g, dtype=np.int64)


# ---------------------------------------------------------------- generators

def reflection(s: QuadForm, v) -> np.ndarray | None:
    """x -> x - (<x,v>/Q(v)) v, or None when Q(v) = 0 or v pairs to zero with everything."""
    F = s.ctx
    v = np.asarray(v, dtype=np.int64)
    qv = s.Q(v)
    if qv == 0:
        return None
    Bv = F.matmul(s.bilinear, v)
    if not Bv.any():
        return None
    coef = F.mul(Bv, F.inv_table[qv])
    return F.sub(np.eye(s.D, dtype=np.int64), F.mul(v[:, None], coef[None, :]))


def _projective_reps(F: FieldCtx, D: int):
    """Nonzero vectors with first nonzero coordinate 1, in counting order."""
    from .linalg import all_vectors
    vs = all_vectors(F.q, D)[1:]
    lead = vs[np.arange(vs.shape[0]), (vs != 0).argmax(axis=1)]
    return vs[lead == 1]


def transvections(s: QuadForm) -> list[np.ndarray]:
    out = []
    for v in _projective_reps(s.ctx, s.D):
        t = reflection(s, v)
        if t is not None:
            out.append(t)
    return out


def hyperbolic_patches(s: QuadSpace) -> list[np.ndarray]:
    """Isometries permuting a Witt basis: plane swaps and e_i <-> f_i swaps."""
    es, fs, rest = witt_decomposition(s)
    D = s.D
    basis = np.array(es + fs + rest, dtype=np.int64).reshape(D, D)   # rows
    P = basis.T
    Pinv = inverse(s.ctx, P)
    m = len(es)
    perms = []
    for i in range(m):
        for j in range(i + 1, m):
            perm = list(range(D))
            perm[i], perm[j] = j, i
            perm[m + i], perm[m + j] = m + j, m + i
            perms.append(perm)
    for i in range(m):
        perm = list(range(D))
        perm[i], perm[m + i] = m + i, i
        perms.append(perm)
    out = []
    for perm in perms:
        Pm = np.zeros((D, D), dtype=np.int64)
        for a, b in enumerate(perm):
            Pm[b, a] = 1
        g = s.ctx.matmul(P, s.ctx.matmul(Pm, Pinv))
        if s.is_isometry(g):
            out.append(g)
    return out


# ---------------------------------------------------------------- invariants

def dickson(s: QuadSpace, g) -> int:
    """0 on SO_Q, 1 on O_Q minus SO_Q."""
    F = s.ctx
    g = _arr(g)
    if not s.is_isometry(g):
        raise ValueError("not an isometry of the form")
    if s.D == 0:
        return 0
    if F.p == 2:
        if s.D % 2:
            return 0
        delta = rank(F, F.sub(g, np.eye(s.D, dtype=np.int64))) % 2
        if s.eta == 1:
            S = s.reference_lagrangian
            gS = S.apply(g)
            alt = (S.dim - (S & gS).dim) % 2
            if alt != delta:
                raise AssertionError("Dickson invariant formulas disagree")
        return delta
    det = determinant(F, g)
    if det == 1:
        return 0
    if det == F.s_neg(1):
        return 1
    raise AssertionError("isometry with determinant other than +-1")


def so_membership(s: QuadSpace, g) -> bool:
    return dickson(s, g) == 0


def is_unipotent(F: FieldCtx, g) -> bool:
    g = _arr(g)
    D = g.shape[0]
    N = F.sub(g, np.eye(D, dtype=np.int64))
    P = np.eye(D, dtype=np.int64)
    for _ in range(D):
        P = F.matmul(P, N)
    return not P.any()


# ---------------------------------------------------------------- closure / orbits

def _frontier_products(F, codec, frontier_keys, gens, right=True):
    mats = codec.decode(frontier_keys)
    out = []
    for g in gens:
        prod = F.bmatmul(mats, g) if right else F.bmatmul(g, mats)
        out.append(codec.encode(prod))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.uint64)


def group_closure_keys(F: FieldCtx, D: int, gens, guard: int = CLOSURE_GUARD) -> np.ndarray:
    """Sorted keys of the group generated by gens (breadth-first, level by level)."""
    codec = MatrixCodec(F.q, D)
    gens = [_arr(g) for g in gens]
    seen = codec.encode(np.eye(D, dtype=np.int64)[None])
    frontier = seen
    while frontier.size:
        new = np.unique(_frontier_products(F, codec, frontier, gens))
        new = new[~np.isin(new, seen, assume_unique=True)]
        seen = np.union1d(seen, new)
        if seen.size > guard:
            raise GuardExceeded(f"closure exceeds guard {guard}")
        frontier = new
    return seen


def group_closure(gens, guard: int = CLOSURE_GUARD) -> list[Mat]:
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    F = gens[0].ctx
    D = gens[0].rows
    codec = MatrixCodec(F.q, D)
    keys = group_closure_keys(F, D, gens, guard)
    return [Mat(F, m) for m in codec.decode(keys)]


def conjugacy_orbit(s: QuadSpace, gens, u, guard: int = CLOSURE_GUARD) -> list[Mat]:
    F = s.ctx
    codec = MatrixCodec(F.q, s.D)
    pairs = [(_arr(g), inverse(F, _arr(g))) for g in gens]
    seen = codec.encode(_arr(u)[None])
    frontier = seen
    while frontier.size:
        mats = codec.decode(frontier)
        new = np.unique(np.concatenate(
            [codec.encode(F.bmatmul(F.bmatmul(g, mats), gi)) for g, gi in pairs]))
        new = new[~np.isin(new, seen, assume_unique=True)]
        seen = np.union1d(seen, new)
        if seen.size > guard:
            raise GuardExceeded("orbit exceeds guard")
        frontier = new
    return [Mat(F, m) for m in codec.decode(seen)]


def conjugation_orbit_ids(F: FieldCtx, elements: np.ndarray, gens) -> np.ndarray:
    """Connected components of the conjugation action of gens on a closed set of matrices.

    elements must be closed under the action; returns orbit ids ordered by first element.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components
    n, D, _ = elements.shape
    codec = MatrixCodec(F.q, D)
    keys = codec.encode(elements)
    order = np.argsort(keys)
    sk = keys[order]
    rows, cols = [], []
    chunk = 1 << 16
    for g in gens:
        g = _arr(g)
        gi = inverse(F, g)
        for start in range(0, n, chunk):
            blk = elements[start:start + chunk]
            img = codec.encode(F.bmatmul(F.bmatmul(g, blk), gi))
            pos = np.searchsorted(sk, img)
            if (pos >= n).any() or not np.array_equal(sk[np.minimum(pos, n - 1)], img):
                raise ValueError("element set is not closed under conjugation")
            rows.append(np.arange(start, start + blk.shape[0]))
            cols.append(order[pos])
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
    else:
        r = c = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="weak")
    # renumber by first occurrence for determinism
    first = {}
    out = np.empty(n, dtype=np.int64)
    for i, lab in enumerate(labels):
        out[i] = first.setdefault(int(lab), len(first))
    return out


# ---------------------------------------------------------------- Schreier-Sims

class StabilizerChain:
    """Randomised Schreier-Sims for a matrix group acting on vectors.

    The base is the standard basis; the product of orbit lengths is a lower
    bound for the order of the group generated by the sifted residues, which
    are themselves products of the input generators.
    """

    def __init__(self, F: FieldCtx, D: int, seed: int = 1):
        self.F, self.D = F, D
        self.weights = np.array([F.q ** i for i in range(D)], dtype=np.int64)
        self.levels = [dict(gens=[], orbit={}, queue=[]) for _ in range(D)]
        for i, lev in enumerate(self.levels):
            e = np.zeros(D, dtype=np.int64)
            e[i] = 1
            lev["orbit"][self._key(e)] = np.eye(D, dtype=np.int64)
        self.rng = np.random.default_rng(seed)

    def _key(self, v) -> int:
        return int(np.dot(v, self.weights))

    def order(self) -> int:
        return _prod(len(lev["orbit"]) for lev in self.levels)

    @property
    def strong_generators(self):
        return list(self.levels[0]["gens"])

    def _extend_orbit(self, i, new_gen=None):
        F = self.F
        lev = self.levels[i]
        orbit = lev["orbit"]
        e = np.zeros(self.D, dtype=np.int64)
        e[i] = 1
        if new_gen is not None:
            todo = list(orbit.items())
            for _, u in todo:
                w = F.matmul(new_gen, u)
                k = self._key(w[:, i])
                if k not in orbit:
                    orbit[k] = w
                    lev["queue"].append(k)
        while lev["queue"]:
            k = lev["queue"].pop()
            u = orbit[k]
            for s in lev["gens"]:
                w = F.matmul(s, u)
                kk = self._key(w[:, i])
                if kk not in orbit:
                    orbit[kk] = w
                    lev["queue"].append(kk)

    def sift(self, g):
        F = self.F
        for i, lev in enumerate(self.levels):
            k = self._key(g[:, i])
            u = lev["orbit"].get(k)
            if u is None:
                return i, g
            g = F.matmul(inverse(F, u), g)
        return None, g

    def add_element(self, g) -> bool:
        i, h = self.sift(g)
        if i is None:
            return False
        for j in range(i + 1):
            lev = self.levels[j]
            lev["gens"].append(h)
            # existing orbit points plus everything reachable with the new generator
            for k in list(lev["orbit"].keys()):
                lev["queue"].append(k)
            self._extend_orbit(j, h)
        return True

    def run(self, gens, target: int | None = None, patience: int = 40, max_rounds: int = 4000):
        F = self.F
        gens = [_arr(g) for g in gens]
        pool = [gens[i % len(gens)].copy() for i in range(max(10, len(gens)))]
        acc = np.eye(self.D, dtype=np.int64)

        def step():
            nonlocal acc
            a, b = self.rng.choice(len(pool), size=2, replace=False)
            if self.rng.random() < 0.5:
                pool[a] = F.matmul(pool[a], pool[b])
            else:
                pool[a] = F.matmul(pool[b], pool[a])
            acc = F.matmul(acc, pool[a])
            return acc

        for _ in range(60):
            step()
        for g in gens:
            self.add_element(g)
        quiet = 0
        rounds = 0
        while rounds < max_rounds:
            rounds += 1
            if target is not None and self.order() == target:
                return True
            if self.add_element(step()):
                quiet = 0
            else:
                quiet += 1
                if quiet >= patience:
                    break
        return target is not None and self.order() == target


@dataclass
class GeneratorCertificate:
    generators: list
    order: int
    method: str
    patches: int


_GEN_CACHE: dict = {}


def certified_generators(s: QuadSpace, closure_limit: int = 200_000) -> GeneratorCertificate:
    """A small generating set of O_Q, certified against the classical order.

    Transvections (plus Witt-basis permutations where they fall short)
    generate the pool; the certificate is either an exact closure or a
    Schreier-Sims chain whose orbit product reaches the classical order.
    """
    key = (s.ctx.q, s.D, s.gram_upper.tobytes())
    if key in _GEN_CACHE:
        return _GEN_CACHE[key]
    F = s.ctx
    target = orthogonal_order(s.D, F.q, s.eta)
    pool = transvections(s)
    patches = hyperbolic_patches(s) if s.D >= 2 else []
    used = 0
    while True:
        if target <= closure_limit:
            keys = group_closure_keys(F, s.D, pool) if pool else \
                MatrixCodec(F.q, s.D).encode(np.eye(s.D, dtype=np.int64)[None])
            if keys.size == target:
                cert = GeneratorCertificate(pool, target, "closure", used)
                break
        else:
            chain = StabilizerChain(F, s.D, seed=7 + used)
            if chain.run(pool, target):
                cert = GeneratorCertificate(chain.strong_generators, target, "schreier-sims", used)
                break
        if used >= len(patches):
            raise AssertionError(f"generators do not reach |O_Q| = {target} for {s}")
        pool = pool + [patches[used]]
        used += 1
    _GEN_CACHE[key] = cert
    return cert


def transvection_generators(s: QuadSpace) -> list[Mat]:
    """All transvections/reflections plus any patches needed to generate O_Q."""
    cert_pool = transvections(s)
    cert = certified_generators(s)
    patches = hyperbolic_patches(s)[:cert.patches]
    return [Mat(s.ctx, g) for g in cert_pool + patches]


def so_generators(s: QuadSpace) -> list[np.ndarray]:
    """Generators of SO_Q from certified generators of O_Q (index-2 Schreier lemma)."""
    gens = certified_generators(s).generators
    if s.ctx.p == 2 and s.D % 2:
        return list(gens)
    F = s.ctx
    deltas = [dickson(s, g) for g in gens]
    odd = [g for g, d in zip(gens, deltas) if d == 1]
    if not odd:
        raise AssertionError("O_Q generators all lie in SO_Q")
    t = odd[0]
    ti = inverse(F, t)
    out = []
    for g, d in zip(gens, deltas):
        if d == 0:
            out += [g, F.matmul(t, F.matmul(g, ti))]
        else:
            out += [F.matmul(g, ti), F.matmul(t, g)]
    uniq = {}
    for g in out:
        uniq.setdefault(g.tobytes(), g)
    return [uniq[k] for k in sorted(uniq)]


# ---------------------------------------------------------------- unipotents

def flag_basis(s: QuadSpace) -> np.ndarray:
    """Columns e_1..e_m, anisotropic rest, f_m..f_1 of a Witt basis."""
    es, fs, rest = witt_decomposition(s)
    cols = es + rest + fs[::-1]
    return np.array(cols, dtype=np.int64).reshape(s.D, s.D).T


def unitriangular_isometries(s: QuadSpace) -> np.ndarray:
    """All isometries of SO_Q that are upper unitriangular in the flag basis.

    Returned in standard coordinates, shape (n, D, D).
    """
    F = s.ctx
    D = s.D
    P = flag_basis(s)
    Pinv = inverse(F, P)
    Bp = F.matmul(P.T, F.matmul(s.bilinear, P))
    Qp = s.Q_many(P.T)
    form = QuadForm(F, _upper_from_sym(F, Bp, Qp))
    from .linalg import all_vectors
    partial = np.zeros((1, D, 0), dtype=np.int64)
    for j in range(D):
        cand = np.zeros((F.q ** j, D), dtype=np.int64)
        if j:
            cand[:, :j] = all_vectors(F.q, j)
        cand[:, j] = 1
        ok_q = form.Q_many(cand) == Qp[j]
        cand = cand[ok_q]
        # pairings with the earlier columns: <col_j, col_i> = Bp[j, i]
        pc = F.matmul(cand, Bp)                     # (c, D)
        new = []
        for cols in partial:
            if j:
                vals = F.matmul(pc, cols)           # (c, j)
                good = np.all(vals == Bp[j, :j][None, :], axis=1)
            else:
                good = np.ones(cand.shape[0], dtype=bool)
            for c in cand[good]:
                new.append(np.hstack([cols, c[:, None]]))
        partial = np.array(new, dtype=np.int64).reshape(-1, D, j + 1)
    mats = F.bmatmul(F.bmatmul(P, partial), Pinv)
    keep = [i for i, g in enumerate(mats) if dickson(s, g) == 0]
    return mats[keep]


def _upper_from_sym(F, B, diag):
    M = np.triu(B, 1).copy()
    M[np.arange(len(diag)), np.arange(len(diag))] = diag
    return M


def _flag_key(F, cols) -> bytes:
    parts = []
    for i in range(1, cols.shape[1] + 1):
        R, _ = rref(F, cols[:, :i].T)
        parts.append(R.tobytes())
    return b"|".join(parts)


def flag_transversal(s: QuadSpace, gens=None) -> list[np.ndarray]:
    """Transporters g in O_Q, one per maximal totally singular flag."""
    F = s.ctx
    P = flag_basis(s)
    m = len(witt_decomposition(s)[0])
    if gens is None:
        gens = certified_generators(s).generators
    start = np.eye(s.D, dtype=np.int64)
    seen = {_flag_key(F, P[:, :m]): start}
    frontier = [start]
    while frontier:
        nxt = []
        for g in frontier:
            for s_ in gens:
                h = F.matmul(s_, g)
                k = _flag_key(F, F.matmul(h, P[:, :m]))
                if k not in seen:
                    seen[k] = h
                    nxt.append(h)
        frontier = nxt
    return [seen[k] for k in sorted(seen)]


def unipotents_by_sylow(s: QuadSpace) -> np.ndarray:
    F = s.ctx
    U = unitriangular_isometries(s)
    expected = p_part(so_order(s.D, F.q, s.eta), F.p)
    if U.shape[0] != expected:
        raise AssertionError(f"unitriangular subgroup has order {U.shape[0]}, expected {expected}")
    codec = MatrixCodec(F.q, s.D)
    keys = []
    for g in flag_transversal(s):
        gi = inverse(F, g)
        keys.append(np.unique(codec.encode(F.bmatmul(F.bmatmul(g, U), gi))))
    allk = np.unique(np.concatenate(keys))
    return codec.decode(allk)


def unipotents_by_closure(s: QuadSpace, guard: int = CLOSURE_GUARD) -> np.ndarray:
    F = s.ctx
    codec = MatrixCodec(F.q, s.D)
    keys = group_closure_keys(F, s.D, so_generators(s), guard)
    mats = codec.decode(keys)
    N = F.sub(mats, np.eye(s.D, dtype=np.int64)[None])
    P = N
    for _ in range(s.D - 1):
        P = F.bmatmul(P, N)
    keep = ~P.reshape(P.shape[0], -1).any(axis=1)
    return mats[keep]


def enumerate_unipotents(s: QuadSpace, method: str = "auto", closure_limit: int = 200_000) -> np.ndarray:
    """All unipotent elements of SO_Q, sorted by encoding, shape (n, D, D)."""
    if method == "auto":
        method = "closure" if so_order(s.D, s.ctx.q, s.eta) <= closure_limit else "sylow"
    if method == "closure":
        return unipotents_by_closure(s)
    if method == "sylow":
        return unipotents_by_sylow(s)
    raise ValueError(f"unknown method {method!r}")


def progress(msg: str):
    print(msg, file=sys.stderr, flush=True)
