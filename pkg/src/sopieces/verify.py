"""Verification suites: the classification, the closed counts and the invariants.

Each suite returns a SuiteResult whose checks are plain data; nothing here
raises on a mismatch.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from . import counting, kernels
from .census import (Census, census, class_partition, kind_of, nilpotent_shadow,
                     piece_representative, unipotent_nilpotents, verify_theorem_1_7)
from .counting import (ODD, card_E2star, card_piece, count_N, dim_d, nu, nu_eps, nu_prime,
                       poly_A, poly_P, poly_Pd, poly_R)
from .filtration import (GradedView, PieceLabel, admissible_labels, canonical_filtration,
                         graded_standard_model, model_filtration)
from .gf import field_of_order
from .groups import (MatrixCodec, group_closure_keys, hyperbolic_patches, orthogonal_order,
                     progress, so_order, transvections)
from .linalg import rank
from .nilpotent import predict_reduced
from .oracles import (OracleGuard, bf_count_E2star, bf_count_E_ge2_star, bf_count_flags,
                      bf_count_subspaces, bf_count_symplectic_flags, bf_gl_order,
                      bf_isometry_order, bf_symplectic_order)
from .quadspace import standard_space

SUITES = ("theorem17", "counts", "invariants")
ENUMERATION_LIMIT = 10 ** 7


@dataclass
class Check:
    id: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "passed": self.passed, "detail": self.detail}


@dataclass
class SuiteResult:
    suite: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def add(self, id: str, passed: bool, **detail):
        self.checks.append(Check(id, bool(passed), detail))

    def to_dict(self) -> dict:
        fails = self.failures()
        return {"suite": self.suite, "passed": self.passed, "checks": len(self.checks),
                "failed": len(fails), "seconds": round(self.seconds, 3),
                "counterexample": fails[0].to_dict() if fails else None,
                "results": [c.to_dict() for c in self.checks]}


# ---------------------------------------------------------------- ranges

KINDS = {True: ("split", "nonsplit"), False: ("odd",)}


def standard_spaces(D: int, q: int):
    F = field_of_order(q)
    return [standard_space(F, D, k) for k in KINDS[D % 2 == 0]]


def in_required_range(D: int, q: int) -> bool:
    """The minimum range that must be enumerated in full."""
    return (2 <= D <= 4 and q in (2, 3, 4, 5)) or (D in (5, 6) and q in (2, 3)) or (D == 7 and q == 2)


def enumeration_range(dmax: int = 7, qlist=(2, 3, 4, 5)):
    """(D, q) pairs to classify exhaustively: the required range plus every other
    pair in the grid whose groups stay within ENUMERATION_LIMIT."""
    out = []
    for q in qlist:
        for D in range(2, dmax + 1):
            small = all(so_order(D, q, None if D % 2 else e) <= ENUMERATION_LIMIT
                        for e in ((1, -1) if D % 2 == 0 else (None,)))
            if in_required_range(D, q) or small:
                out.append((D, q))
    return sorted(out, key=lambda t: (t[0], t[1]))


def _say(verbose, msg):
    if verbose:
        progress(msg)


# ---------------------------------------------------------------- bijection suite

def suite_theorem17(dmax: int = 7, qlist=(2, 3, 4, 5), keep_shift: bool = True,
                    uniqueness: bool = True, backend: str | None = None,
                    verbose: bool = False, censuses: dict | None = None) -> SuiteResult:
    """Adapted canonical filtrations, piece counts, nonemptiness and uniqueness."""
    t0 = time.time()
    res = SuiteResult("theorem17")
    for D, q in enumeration_range(dmax, qlist):
        for s in standard_spaces(D, q):
            tag = f"{s.descriptor},q={q}"
            _say(verbose, f"[theorem17] {tag}")
            cen = census(s, keep_shift=keep_shift, backend=backend)
            if censuses is not None and keep_shift:
                censuses[(s.descriptor, q)] = cen
            rep = verify_theorem_1_7(s, keep_shift=keep_shift, cen=cen,
                                     uniqueness=uniqueness and D <= 4 and q <= 3)
            res.add(f"adapted[{tag}]", rep.adapted_ok, failures=rep.flag_failures,
                    elements=rep.total)
            res.add(f"partition[{tag}]", rep.partition_ok,
                    stray=[str(x) for x in rep.stray_labels])
            res.add(f"piece_counts[{tag}]", rep.counts_ok,
                    mismatches=[p.to_dict() for p in rep.pieces if p.observed != p.predicted_at_q])
            res.add(f"total[{tag}]", rep.total_ok, enumerated=rep.total,
                    formula=rep.expected_total,
                    predicted_sum=sum(p.predicted_at_q for p in rep.pieces))
            res.add(f"nonempty[{tag}]", rep.nonempty_ok,
                    empty=[str(x) for x in rep.empty_labels])
            if s.eta == -1:
                # labels with f_0 = 0 must be empty and predicted empty
                zero = [lab for lab in admissible_labels(D, 1) if lab.at(0) == 0]
                bad = [str(lab) for lab in zero if card_piece(lab, -1).at(q) != 0]
                bad += [str(lab) for lab in cen.piece_counts if lab.at(0) == 0]
                res.add(f"empty_nonsplit[{tag}]", not bad, bad=bad)
            if rep.uniqueness_checked:
                res.add(f"uniqueness[{tag}]", not rep.uniqueness_failures,
                        checked=rep.uniqueness_checked,
                        failures=rep.uniqueness_failures[:3])
            if D == 3:
                regular = PieceLabel.from_dims({-2: 1, 0: 1, 2: 1})
                res.add(f"regular_D3[{tag}]", cen.piece_counts.get(regular, 0) == q * q - 1,
                        observed=cen.piece_counts.get(regular, 0), expected=q * q - 1)
    res.seconds = time.time() - t0
    return res


# ---------------------------------------------------------------- counts

def _types(n):
    return (ODD,) if n % 2 else (1, -1)


def _count_N_cases(smax: int):
    """(s, k, left, right) for every case of count_N with 1 <= k < s <= smax."""
    for s in range(1, smax + 1):
        for k in range(1, s):
            for left in _types(s):
                for right in (_types(k) if k % 2 == 0 else (ODD,)):
                    yield s, k, left, right


def _space_of(F, n, kind):
    name = "odd" if kind is ODD else ("split" if kind == 1 else "nonsplit")
    return standard_space(F, n, name)


def _oracle(res: SuiteResult, id: str, formula, fn, skipped: list, **info):
    try:
        value = fn()
    except OracleGuard:
        skipped.append(id)
        return
    res.add(id, value == formula, formula=formula, oracle=value, **info)


def _descending_chains(top: int, start_parity: int):
    """Chains r_0 > r_1 > ... (strictly decreasing, positive) with r_0 of the given parity."""
    for r0 in range(1, top + 1):
        if r0 % 2 != start_parity:
            continue
        rest = list(range(1, r0))
        for n in range(0, len(rest) + 1):
            for tail in itertools.combinations(sorted(rest, reverse=True), n):
                yield (r0,) + tuple(sorted(tail, reverse=True))


def suite_counts(qlist=(2, 3, 4, 5), smax: int = 6, poly_dmax: int = 8, fib_dmax: int = 4,
                 verbose: bool = False, censuses: dict | None = None) -> SuiteResult:
    """Closed formulas against literal enumeration, and polynomiality."""
    t0 = time.time()
    res = SuiteResult("counts")
    skipped: list = []
    fields = {q: field_of_order(q) for q in qlist}

    # formula against oracle: count_N in all four cases
    _say(verbose, "[counts] count_N against subspace scans")
    for q in qlist:
        F = fields[q]
        for s, k, left, right in _count_N_cases(smax):
            form = _space_of(F, s, left)
            formula = count_N(s, k, left, right).at(q)
            _oracle(res, f"count_N[s={s},k={k},{left},{right},q={q}]", formula,
                    lambda: bf_count_subspaces(form, k, None if right is ODD else right),
                    skipped, s=s, k=k, q=q)

    _say(verbose, "[counts] group orders and symplectic flags")
    for q in qlist:
        F = fields[q]
        for m in range(0, 4):
            _oracle(res, f"A[{m},q={q}]", poly_A(m).at(q), lambda: bf_gl_order(F, m), skipped)
        for m in range(0, smax + 1, 2):
            if poly_R(m).at(q) > 5 * 10 ** 5:
                skipped.append(f"R[{m},q={q}]")
                continue
            _oracle(res, f"R[{m},q={q}]", poly_R(m).at(q), lambda: bf_symplectic_order(F, m), skipped)
        for m in range(1, smax + 1, 2):
            if orthogonal_order(m, q, None) > 5 * 10 ** 5:
                skipped.append(f"P[{m},q={q}]")
                continue
            div = 1 if q % 2 == 0 else 2
            _oracle(res, f"P[{m},q={q}]", poly_P(m).at(q),
                    lambda: bf_isometry_order(_space_of(F, m, ODD)) // div, skipped)
        for m in range(2, smax + 1, 2):
            for d in (1, -1):
                if orthogonal_order(m, q, d) > 5 * 10 ** 5:
                    skipped.append(f"Pd[{m},{d},q={q}]")
                    continue
                _oracle(res, f"Pd[{m},{d},q={q}]", poly_Pd(m, d).at(q),
                        lambda: bf_isometry_order(_space_of(F, m, d)) // 2, skipped)
        for chain in [(2,), (2, 2), (4, 2), (4, 2, 2), (6, 2), (6, 4), (6, 4, 2), (4, 4, 2)]:
            _oracle(res, f"nu_prime[{chain},q={q}]", nu_prime(*chain).at(q),
                    lambda: bf_count_symplectic_flags(F, [c for c in chain]), skipped)

    # polynomiality over every admissible argument
    _say(verbose, "[counts] polynomiality up to D = %d" % poly_dmax)
    certified = 0
    failures = []
    for top in range(1, poly_dmax + 1):
        for chain in _descending_chains(top, top % 2):
            if chain[0] != top:
                continue
            try:
                if top % 2:
                    nu(*chain)
                else:
                    for e in (1, -1):
                        nu_eps(e, *chain)
                certified += 1
            except counting.NonIntegralCount as exc:
                failures.append({"chain": chain, "error": str(exc)})
    for D in range(2, poly_dmax + 1):
        for eta in ((1, -1) if D % 2 == 0 else (None,)):
            for lab in admissible_labels(D, eta):
                try:
                    kind = ODD if eta is None else eta
                    f0 = lab.at(0)
                    card_E2star(lab, kind if f0 and f0 % 2 == 0 else ODD)
                    card_piece(lab, kind)
                    certified += 1
                except counting.NonIntegralCount as exc:
                    failures.append({"label": str(lab), "error": str(exc)})
    res.add("polynomiality", not failures, certified=certified, failures=failures[:5])

    # the same polynomials against brute force in both characteristics
    _say(verbose, "[counts] polynomials against brute force in both characteristics")
    for q in qlist:
        F = fields[q]
        for chain in [(3, 1), (4, 2), (4, 1), (5, 3), (5, 1), (5, 3, 1), (4, 2, 1), (3, 2), (4, 3)]:
            for kind in _types(chain[0]):
                form = _space_of(F, chain[0], kind)
                poly = nu(*chain) if kind is ODD else nu_eps(kind, *chain)
                _oracle(res, f"nu[{kind},{chain},q={q}]", poly.at(q),
                        lambda: bf_count_flags(form, list(chain)), skipped)
        for D in range(2, 5):
            for eta in ((1, -1) if D % 2 == 0 else (None,)):
                for lab in admissible_labels(D, eta):
                    f0 = lab.at(0)
                    zk = None
                    if f0:
                        zk = "odd" if f0 % 2 else ("split" if eta == 1 else "nonsplit")
                    kind = ODD if eta is None else eta
                    model = graded_standard_model(F, lab.dims, zk)
                    _oracle(res, f"E2star[{lab},{eta},q={q}]",
                            card_E2star(lab, kind if f0 and f0 % 2 == 0 else ODD).at(q),
                            lambda: bf_count_E2star(model), skipped)
        if censuses is not None:
            for (desc, qq), cen in sorted(censuses.items()):
                if qq != q or cen.space.D > 4:
                    continue
                for lab in admissible_labels(cen.space.D, cen.space.eta):
                    res.add(f"piece[{desc},{lab},q={q}]",
                            card_piece(lab, kind_of(cen.space)).at(q) == cen.piece_counts.get(lab, 0),
                            formula=card_piece(lab, kind_of(cen.space)).at(q),
                            enumerated=cen.piece_counts.get(lab, 0))

    # fibration: |E^{>=2}_*| = q^d |E^2_*|
    _say(verbose, "[counts] fibration cardinalities")
    for D in range(2, fib_dmax + 1):
        for s in standard_spaces(D, 2):
            for lab in admissible_labels(D, s.eta):
                filt = model_filtration(s, lab)
                model = GradedView.of(filt).model
                d = dim_d(lab)
                try:
                    big = bf_count_E_ge2_star(filt)
                    small = bf_count_E2star(model)
                except OracleGuard:
                    skipped.append(f"fibration[{s.descriptor},{lab}]")
                    continue
                res.add(f"fibration[{s.descriptor},{lab},q=2]", big == 2 ** d * small,
                        E_ge2_star=big, E2_star=small, d=d)
    comparisons = sum(1 for c in res.checks if "oracle" in c.detail)
    res.add("oracle_comparisons_at_least_200", comparisons >= 200, comparisons=comparisons,
            skipped=len(skipped))
    res.seconds = time.time() - t0
    return res


# ---------------------------------------------------------------- invariants

def _pad(t, n):
    t = tuple(int(x) for x in t)
    return t + (0,) * (n - len(t))


def xi_rule(c, eps, a: int) -> int:
    """Predicted dim ker(N-bar^a : gr^{-a} -> gr^a) for even a >= 2."""
    ca = c[a - 1] if a - 1 < len(c) else 0
    if ca % 2:
        return 1
    phi = sum(1 for b in range(a + 2, len(c) + 1, 2) if c[b - 1] % 2)
    if phi % 2:
        return 1
    return eps[a - 1] if a - 1 < len(eps) else 0


def check_reduction_rows(cen: Census) -> tuple[int, list]:
    """Transition rules and the kernel-dimension rule on the distinct invariant rows."""
    r = cen.result
    D = cen.space.D
    key = np.hstack([r["lev_e"], r["lev_lam"], r["lev_c"].reshape(cen.n, -1),
                     r["lev_eps"].reshape(cen.n, -1), r["xi"], r["nlev"][:, None]]).astype(np.int16)
    uniq = np.unique(key, axis=0)
    L = kernels.MAXLEV
    bad = []
    for row in uniq:
        e = row[:L]
        lam = row[L:2 * L]
        c = row[2 * L:2 * L + L * D].reshape(L, D)
        eps = row[2 * L + L * D:2 * L + 2 * L * D].reshape(L, D)
        xi = row[2 * L + 2 * L * D:2 * L + 2 * L * D + D + 1]
        nlev = int(row[-1])
        for j in range(nlev - 1):
            pc, pe = predict_reduced(tuple(c[j]), tuple(eps[j]), int(e[j]), bool(lam[j]))
            if _pad(pc, D) != _pad(c[j + 1], D) or _pad(pe, D) != _pad(eps[j + 1], D):
                bad.append({"level": j, "c": c[j].tolist(), "eps": eps[j].tolist(), "e": int(e[j]),
                            "lam": int(lam[j]), "predicted": [list(pc), list(pe)],
                            "found": [c[j + 1].tolist(), eps[j + 1].tolist()]})
        for a in range(2, D + 1, 2):
            if int(xi[a]) != xi_rule(tuple(c[0]), tuple(eps[0]), a):
                bad.append({"xi_rule": a, "c": c[0].tolist(), "eps": eps[0].tolist(),
                            "xi": int(xi[a])})
    return len(uniq), bad


def lagrangian_parity(s, g) -> int:
    """dim(S / (S meet gS)) mod 2 for the reference maximal totally singular S."""
    S = s.reference_lagrangian
    return (S.dim - (S & S.apply(g)).dim) % 2


def orthogonal_unipotents_with_parity(s, limit: int = 2 * 10 ** 5):
    """Unipotent elements of O_Q and a Dickson invariant computed without rank(g - 1).

    When transvections generate O_Q, SO_Q is the subgroup of even words in them.
    In the one exception (O^+_4(2)) plane swaps are added to reach O_Q and the
    invariant is read off a maximal totally singular subspace instead.
    """
    F = s.ctx
    target = orthogonal_order(s.D, F.q, s.eta)
    if target > limit:
        raise OracleGuard("orthogonal group too large")
    ts = transvections(s)
    full = group_closure_keys(F, s.D, ts)
    by_words = full.size == target
    if not by_words:
        full = group_closure_keys(F, s.D, ts + hyperbolic_patches(s))
        if full.size != target or s.eta != 1:
            raise AssertionError("could not generate the orthogonal group")
    codec = MatrixCodec(F.q, s.D)
    mats = codec.decode(full)
    N = F.sub(mats, np.eye(s.D, dtype=np.int64)[None])
    P = N
    for _ in range(s.D - 1):
        P = F.bmatmul(P, N)
    keep = ~P.reshape(P.shape[0], -1).any(axis=1)
    if by_words:
        t0 = ts[0]
        even = group_closure_keys(F, s.D, [F.matmul(t0, t) for t in ts[1:]] or [F.matmul(t0, t0)])
        delta = (~np.isin(full[keep], even)).astype(np.int64)
        so_size = even.size
    else:
        delta = np.array([lagrangian_parity(s, g) for g in mats[keep]], dtype=np.int64)
        so_size = int(sum(lagrangian_parity(s, g) == 0 for g in mats))
    return mats[keep], delta, so_size, ("even transvection words" if by_words
                                        else "maximal totally singular subspace")


def suite_invariants(dmax: int = 7, qlist=(2, 3, 4, 5), orbit_dmax: int = 6,
                     backend: str | None = None, verbose: bool = False,
                     censuses: dict | None = None) -> SuiteResult:
    """Reduction rules, kernel dimensions, Dickson parity, orbit labels and shadows."""
    t0 = time.time()
    res = SuiteResult("invariants")
    cache = censuses if censuses is not None else {}

    def get(s, q):
        key = (s.descriptor, q)
        if key not in cache:
            cache[key] = census(s, backend=backend)
        return cache[key]

    for D, q in enumeration_range(dmax, qlist):
        if q % 2:
            continue
        for s in standard_spaces(D, q):
            tag = f"{s.descriptor},q={q}"
            _say(verbose, f"[invariants] reduction rules {tag}")
            cen = get(s, q)
            nrows, bad = check_reduction_rows(cen)
            res.add(f"reduction_rules[{tag}]", not bad, distinct_rows=nrows, failures=bad[:3])
            res.add(f"line_checks[{tag}]", cen.missing(kernels.FLAG_LINE)["line_checks"] == 0)
            res.add(f"class_label_defined[{tag}]",
                    cen.missing(kernels.FLAG_CLASS)["class_label_well_defined"] == 0)

    # Dickson parity on all twisted nilpotents (even D, char 2)
    for q in [q for q in qlist if q % 2 == 0]:
        for D in range(2, dmax + 1, 2):
            for s in standard_spaces(D, q):
                tag = f"{s.descriptor},q={q}"
                try:
                    mats, delta, so_size, how = orthogonal_unipotents_with_parity(s)
                except OracleGuard:
                    continue
                _say(verbose, f"[invariants] Dickson parity {tag}")
                F = s.ctx
                N = F.sub(mats, np.eye(D, dtype=np.int64)[None])
                kers = np.array([D - rank(F, n) for n in N])
                ok = np.array_equal(delta, kers % 2)
                res.add(f"dickson_parity[{tag}]", ok and so_size == so_order(D, q, s.eta),
                        unipotents_in_O=int(len(mats)), in_SO=int((delta == 0).sum()),
                        so_order=so_size, invariant_from=how)

    # perps of nonpositive degrees pick up the radical (odd D, char 2)
    for q in [q for q in qlist if q % 2 == 0]:
        for D in (3, 5):
            for s in standard_spaces(D, q):
                cen = get(s, q) if (D, q) in enumeration_range(dmax, qlist) else None
                if cen is None:
                    continue
                R = s.radical
                bad = 0
                for i in range(0, cen.n, max(1, cen.n // 200)):
                    filt = canonical_filtration(s, unipotent_nilpotents(s, cen.unipotents[i:i + 1])[0])
                    for a in range(filt.start - 1, 1):
                        lhs = s.perp(filt.X(a))
                        rhs = filt.X(1 - a) + R
                        if lhs != rhs or rhs.dim != filt.X(1 - a).dim + R.dim:
                            bad += 1
                res.add(f"perp_with_radical[{s.descriptor},q={q}]", bad == 0, bad=bad)

    # labels constant on conjugation orbits
    for D, q in enumeration_range(dmax, qlist):
        if D > orbit_dmax or (q % 2 and D > 4) or (q == 4 and D > 4) or (q == 3 and D > 4):
            continue
        for s in standard_spaces(D, q):
            tag = f"{s.descriptor},q={q}"
            _say(verbose, f"[invariants] conjugation orbits {tag}")
            rep = class_partition(s, cen=get(s, q))
            res.add(f"orbit_labels[{tag}]", rep.constant, orbits=rep.orbits,
                    pieces_are_single_orbits=rep.pieces_are_orbits,
                    orbit_sizes_by_label=rep.by_label)

    # shadows separate pieces (char 2, D <= 4)
    for D in range(2, 5):
        for s in standard_spaces(D, 2):
            cen = get(s, 2)
            seen = {}
            for i in range(cen.n):
                lab = cen.element_labels[i]
                inv = nilpotent_shadow(s, cen.unipotents[i]).invariants
                seen.setdefault(tuple(lab.f), set()).add(inv)
            labs = list(seen)
            clash = [(str(a), str(b)) for a, b in itertools.combinations(labs, 2) if seen[a] & seen[b]]
            res.add(f"shadow_separates[{s.descriptor},q=2]", not clash, clashes=clash)

    # representatives built by lifting graded maps
    for D, q in [(d, q) for d in range(2, 5) for q in qlist] + [(5, 2), (6, 2)]:
        if q not in qlist or D > dmax:
            continue
        for s in standard_spaces(D, q):
            bad = []
            for lab in admissible_labels(D, s.eta):
                try:
                    piece_representative(s, lab)
                except (AssertionError, ValueError) as exc:
                    bad.append({"label": str(lab), "error": str(exc)})
            res.add(f"representatives[{s.descriptor},q={q}]", not bad, failures=bad)
    res.seconds = time.time() - t0
    return res


def run_suites(names, dmax: int = 7, qlist=(2, 3, 4, 5), backend: str | None = None,
               verbose: bool = False) -> list[SuiteResult]:
    if "all" in names:
        names = SUITES
    shared: dict = {}
    out = []
    for name in SUITES:
        if name not in names:
            continue
        if name == "theorem17":
            out.append(suite_theorem17(dmax, qlist, backend=backend, verbose=verbose,
                                       censuses=shared))
        elif name == "counts":
            out.append(suite_counts(qlist, verbose=verbose, censuses=shared or None))
        elif name == "invariants":
            out.append(suite_invariants(dmax, qlist, backend=backend, verbose=verbose,
                                        censuses=shared))
    return out
