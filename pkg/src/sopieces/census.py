"""Whole-space runs: every unipotent of SO_Q classified, tallied into pieces and checked.

The per-element work goes through `sopieces.kernels`; this module turns the
arrays into labels, piece tallies, orbit reports and verdicts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .counting import ODD, card_piece
from .filtration import (ClassLabel, GradedModel, GradedView, PieceLabel, adapted_filtrations,
                         admissible_labels, canonical_filtration, lift_to_filtration,
                         model_filtration, piece_label, split_filtration)
from .groups import (conjugation_orbit_ids, enumerate_unipotents, progress, so_generators,
                     unipotent_count)
from .linalg import Subspace, all_vectors, inverse, mat_pow, nullspace
from .nilpotent import jordan_data, nilpotency_index
from .oracles import _linear_E2_basis
from .quadspace import QuadForm, QuadSpace, witt_decomposition

FLAG_NAMES = {
    kernels.FLAG_NILPOTENT: "nilpotent",
    kernels.FLAG_TWIST: "twisted_nilpotent",
    kernels.FLAG_QFILT: "q_filtration",
    kernels.FLAG_RAISES: "raises_by_two",
    kernels.FLAG_E2: "graded_E2",
    kernels.FLAG_STAR: "graded_star",
    kernels.FLAG_LINE: "line_checks",
    kernels.FLAG_CLASS: "class_label_well_defined",
}


def kind_of(s: QuadSpace):
    return ODD if s.eta is None else s.eta


def unipotent_nilpotents(s: QuadSpace, U: np.ndarray) -> np.ndarray:
    F = s.ctx
    return F.sub(U, np.eye(s.D, dtype=np.int64)[None])


@dataclass
class Census:
    """Kernel output for every unipotent of one space."""
    space: QuadSpace
    unipotents: np.ndarray
    result: dict
    keep_shift: bool = True

    @property
    def n(self) -> int:
        return self.unipotents.shape[0]

    @cached_property
    def _piece_groups(self):
        r = self.result
        key = np.hstack([r["f"].astype(np.int16), r["comp"][:, None].astype(np.int16)])
        return np.unique(key, axis=0, return_inverse=True, return_counts=True)

    def _label_from_row(self, row) -> PieceLabel:
        D = self.space.D
        f = [int(x) for x in row[:2 * D + 1]]
        comp = int(row[2 * D + 1])
        dims = {a: f[a + D] for a in range(-D, D + 1) if f[a + D]}
        return PieceLabel.from_dims(dims, None if comp < 0 else comp)

    @cached_property
    def piece_counts(self) -> dict:
        keys, _, counts = self._piece_groups
        out = {}
        for row, c in zip(keys, counts):
            lab = self._label_from_row(row)
            out[lab] = out.get(lab, 0) + int(c)
        return out

    @cached_property
    def element_labels(self) -> list:
        keys, inv, _ = self._piece_groups
        labs = [self._label_from_row(row) for row in keys]
        return [labs[i] for i in np.asarray(inv).ravel()]

    def class_label_at(self, i: int) -> ClassLabel:
        D = self.space.D
        lab = self.element_labels[i]
        f = self.result["f"][i]
        srep = self.result["srep"][i]
        blocks = {}
        for half in range(D // 2 + 1):
            root = int(srep[half])
            if root < 0:
                continue
            blocks.setdefault(root, set()).add(int(f[D - 2 * half]))
        S = tuple(sorted(tuple(sorted(b)) for b in blocks.values()))
        return ClassLabel(lab, S)

    @cached_property
    def class_labels(self) -> list:
        r = self.result
        key = np.hstack([r["f"], r["comp"][:, None], r["srep"]]).astype(np.int16)
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        inv = np.asarray(inv).ravel()
        first = {}
        for i, k in enumerate(inv):
            first.setdefault(int(k), i)
        reps = {k: self.class_label_at(i) for k, i in first.items()}
        return [reps[int(k)] for k in inv]

    def missing(self, mask: int) -> dict:
        """Number of elements lacking each flag in mask."""
        fl = self.result["flags"]
        return {name: int(((fl & bit) == 0).sum()) for bit, name in FLAG_NAMES.items() if bit & mask}


def census(s: QuadSpace, keep_shift: bool = True, backend: str | None = None,
           method: str = "auto", verbose: bool = False) -> Census:
    if verbose:
        progress(f"enumerating unipotents of {s.descriptor} over GF({s.ctx.q})")
    U = enumerate_unipotents(s, method=method)
    if verbose:
        progress(f"  {U.shape[0]} unipotents; classifying")
    res = kernels.classify_batch(s, unipotent_nilpotents(s, U), keep_shift=keep_shift,
                                 backend=backend)
    return Census(s, U, res, keep_shift)


# ---------------------------------------------------------------- the bijection

@dataclass
class PieceRecord:
    label: PieceLabel
    observed: int
    predicted_poly: str
    predicted_at_q: int

    def to_dict(self) -> dict:
        return {"phi": list(self.label.f), "component": self.label.component,
                "label": str(self.label), "predicted_poly": self.predicted_poly,
                "predicted_at_q": self.predicted_at_q, "observed": self.observed}


@dataclass
class BijectionReport:
    descriptor: str
    q: int
    total: int
    expected_total: int
    flag_failures: dict
    pieces: list
    stray_labels: list
    empty_labels: list
    uniqueness_checked: int = 0
    uniqueness_failures: list = field(default_factory=list)

    @property
    def adapted_ok(self) -> bool:
        return not any(self.flag_failures.values())

    @property
    def counts_ok(self) -> bool:
        return all(p.observed == p.predicted_at_q for p in self.pieces)

    @property
    def partition_ok(self) -> bool:
        return not self.stray_labels and sum(p.observed for p in self.pieces) == self.total

    @property
    def total_ok(self) -> bool:
        return self.total == self.expected_total and \
            sum(p.predicted_at_q for p in self.pieces) == self.total

    @property
    def nonempty_ok(self) -> bool:
        return not self.empty_labels

    @property
    def passed(self) -> bool:
        return (self.adapted_ok and self.counts_ok and self.partition_ok and self.total_ok
                and self.nonempty_ok and not self.uniqueness_failures)

    def to_dict(self) -> dict:
        return {
            "space": self.descriptor, "q": self.q, "total": self.total,
            "expected_total": self.expected_total, "passed": self.passed,
            "flag_failures": self.flag_failures,
            "pieces": [p.to_dict() for p in self.pieces],
            "stray_labels": [str(x) for x in self.stray_labels],
            "empty_labels": [str(x) for x in self.empty_labels],
            "uniqueness_checked": self.uniqueness_checked,
            "uniqueness_failures": self.uniqueness_failures,
        }


def piece_records(s: QuadSpace, observed: dict) -> list[PieceRecord]:
    q = s.ctx.q
    out = []
    for lab in admissible_labels(s.D, s.eta):
        poly = card_piece(lab, kind_of(s))
        out.append(PieceRecord(lab, observed.get(lab, 0), poly.render(), poly.at(q)))
    return out


def verify_theorem_1_7(s: QuadSpace, keep_shift: bool = True, uniqueness: bool | None = None,
                       backend: str | None = None, cen: Census | None = None,
                       verbose: bool = False) -> BijectionReport:
    """Classify every unipotent of SO_Q and check the bijection with admissible labels.

    uniqueness=None runs the exhaustive uniqueness search when D <= 4 and q <= 3.
    """
    cen = cen or census(s, keep_shift=keep_shift, backend=backend, verbose=verbose)
    observed = cen.piece_counts
    records = piece_records(s, observed)
    admissible = {p.label for p in records}
    stray = sorted((lab for lab in observed if lab not in admissible), key=PieceLabel.sort_key)
    empty = [p.label for p in records if p.observed == 0]
    rep = BijectionReport(s.descriptor, s.ctx.q, cen.n, unipotent_count(s),
                        cen.missing(kernels.ADAPTED), records, stray, empty)
    if uniqueness is None:
        uniqueness = s.D <= 4 and s.ctx.q <= 3
    if uniqueness:
        if verbose:
            progress(f"  exhaustive uniqueness search on {cen.n} elements")
        Ns = unipotent_nilpotents(s, cen.unipotents)
        for i, N in enumerate(Ns):
            hits = adapted_filtrations(s, N)
            ok = len(hits) == 1 and kernels.filtration_hash(hits[0]) == int(cen.result["fhash"][i])
            rep.uniqueness_checked += 1
            if not ok:
                rep.uniqueness_failures.append({"index": i, "adapted_found": len(hits),
                                                "N": N.tolist()})
    return rep


# ---------------------------------------------------------------- conjugation orbits

@dataclass
class OrbitReport:
    descriptor: str
    q: int
    orbits: int
    constant: bool
    by_label: dict            # label string -> list of orbit sizes
    inconsistent: list

    @property
    def pieces_are_orbits(self) -> bool:
        return all(len(v) == 1 for v in self.by_label.values())

    def to_dict(self) -> dict:
        return {"space": self.descriptor, "q": self.q, "orbits": self.orbits,
                "label_constant_on_orbits": self.constant,
                "pieces_are_single_orbits": self.pieces_are_orbits,
                "orbit_sizes_by_label": self.by_label, "inconsistent_orbits": self.inconsistent}


def class_partition(s: QuadSpace, cen: Census | None = None, backend: str | None = None) -> OrbitReport:
    """SO_Q-conjugation orbits on unipotents against the (piece, component, S) labels."""
    cen = cen or census(s, backend=backend)
    ids = conjugation_orbit_ids(s.ctx, cen.unipotents, so_generators(s))
    with_classes = s.ctx.p == 2
    labels = [str(c) if with_classes and c.piece.at(0) > 0 else str(c.piece)
              for c in cen.class_labels] if with_classes else [str(x) for x in cen.element_labels]
    per_orbit = {}
    for oid, lab in zip(ids, labels):
        per_orbit.setdefault(int(oid), set()).add(lab)
    inconsistent = [oid for oid, labs in per_orbit.items() if len(labs) > 1]
    sizes = np.bincount(ids)
    by_label = {}
    for oid, labs in sorted(per_orbit.items()):
        for lab in sorted(labs):
            by_label.setdefault(lab, []).append(int(sizes[oid]))
    by_label = {k: sorted(v, reverse=True) for k, v in sorted(by_label.items())}
    return OrbitReport(s.descriptor, s.ctx.q, len(per_orbit), not inconsistent, by_label,
                       inconsistent)


# ---------------------------------------------------------------- nilpotent shadow

@dataclass
class NilpotentShadow:
    nabla: np.ndarray
    c: tuple
    singular: tuple     # singular-vector counts of nabla^j(ker nabla^m), keyed by (j, m)

    @property
    def invariants(self) -> tuple:
        return self.c, self.singular


def singular_profile(s: QuadSpace, nabla) -> tuple:
    """Counts of singular vectors in nabla^j(ker nabla^m) for all j, m.

    These are conjugation invariants; together with the Jordan type they separate
    the nilpotent orbits met at small dimension.
    """
    F = s.ctx
    D = s.D
    out = []
    for m in range(1, D + 1):
        K = nullspace(F, mat_pow(F, nabla, m))
        for j in range(0, m):
            W = Subspace(F, D, F.matmul(K, mat_pow(F, nabla, j).T)) if K.shape[0] else None
            if W is None or W.dim == 0:
                out.append(((j, m), 1))
                continue
            vecs = F.matmul(all_vectors(F.q, W.dim), W.basis)
            out.append(((j, m), int((s.Q_many(vecs) == 0).sum())))
    return tuple(out)


def _match_anisotropic(form_src: QuadForm, src_rows, form_dst: QuadForm, dst_rows):
    """Images in span(dst_rows) of src_rows with the same Q values and pairings."""
    F = form_src.ctx
    k = len(src_rows)
    if k == 0:
        return []
    src = np.array(src_rows)
    dst = np.array(dst_rows)
    qs = form_src.Q_many(src)
    ps = form_src.pairing(src, src)
    cands = F.matmul(all_vectors(F.q, dst.shape[0]), dst)
    qc = form_dst.Q_many(cands)
    pools = [cands[qc == qs[i]] for i in range(k)]
    for choice in itertools.product(*[range(len(p)) for p in pools]):
        vs = np.array([pools[i][j] for i, j in enumerate(choice)])
        if np.array_equal(form_dst.pairing(vs, vs), ps) and \
                Subspace(F, form_dst.D, vs).dim == k:
            return list(vs)
    raise AssertionError("anisotropic parts are not isometric")


def graded_isometry(model_form: QuadForm, s: QuadSpace) -> np.ndarray:
    """A matrix g with Q(g x) = Q_model(x), built from Witt decompositions of both sides."""
    F = s.ctx
    es_m, fs_m, rest_m = witt_decomposition(model_form)
    es_v, fs_v, rest_v = witt_decomposition(s)
    if len(es_m) != len(es_v) or len(rest_m) != len(rest_v):
        raise AssertionError("graded form and ambient form have different Witt types")
    rest_img = _match_anisotropic(model_form, rest_m, s, rest_v)
    src = np.array(es_m + fs_m + list(rest_m), dtype=np.int64).reshape(-1, s.D)
    dst = np.array(es_v + fs_v + list(rest_img), dtype=np.int64).reshape(-1, s.D)
    g = F.matmul(dst.T, inverse(F, src.T))
    if not np.array_equal(s.Q_many(F.matmul(src, g.T)), model_form.Q_many(src)) or \
            not np.array_equal(s.pairing(F.matmul(src, g.T), F.matmul(src, g.T)),
                               model_form.pairing(src, src)):
        raise AssertionError("constructed map is not an isometry")
    return g


def nilpotent_shadow(s: QuadSpace, u) -> NilpotentShadow:
    """Transport N-bar on (gr, Q-bar) to V; the image lies in the nilpotent Lie algebra of Q."""
    F = s.ctx
    if F.p != 2:
        raise ValueError("the nilpotent shadow is defined in characteristic 2")
    u = np.asarray(u, dtype=np.int64)
    N = F.sub(u, np.eye(s.D, dtype=np.int64))
    filt = canonical_filtration(s, N)
    view = GradedView.of(filt)
    Nbar = view.bar(N)
    g = graded_isometry(view.model.form, s)
    nabla = F.matmul(g, F.matmul(Nbar, inverse(F, g)))
    BN = F.matmul(s.bilinear, nabla)
    if F.add(BN, BN.T).any() or np.diag(BN).any():
        raise AssertionError("shadow is not in the nilpotent Lie algebra of Q")
    if nilpotency_index(F, nabla) < 0:
        raise AssertionError("shadow is not nilpotent")
    _, c = jordan_data(F, nabla)
    return NilpotentShadow(nabla, c, singular_profile(s, nabla))


# ---------------------------------------------------------------- representatives

def graded_model_of_split(s: QuadSpace, pieces: dict) -> GradedModel:
    degs = sorted(pieces)
    basis = np.vstack([pieces[a] for a in degs])
    dims = {a: pieces[a].shape[0] for a in degs}
    return GradedModel(s.ctx, dims, s.gram_in_basis(basis))


def first_E2_star(model: GradedModel, limit: int = 1 << 20):
    """Some T in E^2_* of the model, scanning E^2 in a fixed order."""
    F = model.ctx
    basis = _linear_E2_basis(model)
    dim = basis.shape[0]
    for i, coeffs in enumerate(itertools.product(range(F.q), repeat=dim)):
        if i >= limit:
            break
        c = np.array(coeffs, dtype=np.int64)
        T = F.sum(F.mul(c[:, None, None], basis), axis=0) if dim else \
            np.zeros((model.D, model.D), dtype=np.int64)
        if model.star_conditions(T):
            return T
    return None


def piece_representative(s: QuadSpace, label: PieceLabel) -> np.ndarray:
    """A nilpotent N with 1 + N in SO_Q whose canonical filtration has this label."""
    F = s.ctx
    filt = model_filtration(s, label)
    pieces = split_filtration(filt)
    model = graded_model_of_split(s, pieces)
    T = first_E2_star(model)
    if T is None:
        raise ValueError(f"no graded map in E2_* for {label}")
    N = lift_to_filtration(T, pieces, s)
    u = F.add(np.eye(s.D, dtype=np.int64), N)
    if not s.is_isometry(u):
        raise AssertionError("lifted element is not an isometry")
    got = piece_label(canonical_filtration(s, N))
    if got != label:
        raise AssertionError(f"lifted element has label {got}, expected {label}")
    return N
