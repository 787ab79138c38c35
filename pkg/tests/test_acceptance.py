"""Acceptance criteria, each at zero tolerance (every comparison is exact).

The full suites run once per session; a run takes about five minutes on one core.
"""
import json
import time

import pytest

from sopieces import counting
from sopieces.verify import (enumeration_range, in_required_range, run_suites, suite_counts,
                             suite_theorem17)

from conftest import ACCEPTANCE_LINES

QLIST = (2, 3, 4, 5)
FORMULA_PREFIXES = ("count_N", "nu_prime", "A", "R", "P", "Pd")


def verdict(n, ok, summary):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {summary}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def prefix(check):
    return check.id.split("[")[0]


def tag(check):
    return check.id[check.id.index("[") + 1:-1]


@pytest.fixture(scope="module")
def suites():
    t0 = time.time()
    out = {r.suite: r for r in run_suites(["all"], dmax=7, qlist=QLIST)}
    out["_wall"] = time.time() - t0
    return out


def q_of(check):
    return int(check.id.rsplit("q=", 1)[1].rstrip("]"))


def space_of(check):
    """(D, q) from an id like adapted[D4+,q=3]."""
    desc, q = tag(check).split(",q=")
    return int(desc[1:].rstrip("+-")), int(q)


def checks(res, *names):
    return [c for c in res.checks if prefix(c) in names]


def test_criterion_1_bijection(suites):
    th = suites["theorem17"]
    covered = {space_of(c) for c in checks(th, "adapted")}
    missing = [(D, q) for D in range(2, 8) for q in QLIST
               if in_required_range(D, q) and (D, q) not in covered]
    adapted = checks(th, "adapted", "partition")
    uniq = checks(th, "uniqueness")
    small = {(D, q) for D, q in enumeration_range(7, QLIST) if D <= 4 and q <= 3}
    uniq_spaces = {tag(c) for c in uniq}
    ok = (not missing and all(c.passed for c in adapted + uniq)
          and len(uniq_spaces) == sum(1 if D % 2 else 2 for D, _ in small)
          and th.seconds < 600)
    verdict(1, ok, f"{len(checks(th, 'adapted'))} spaces, {sum(c.detail.get('elements', 0) for c in adapted)} "
                   f"unipotents classified, uniqueness on {len(uniq_spaces)} spaces, "
                   f"{th.seconds:.0f} s")


def test_criterion_2_piece_counts(suites):
    th = suites["theorem17"]
    pc = checks(th, "piece_counts", "total")
    d3 = {tag(c): c.detail["observed"] for c in checks(th, "regular_D3")}
    spot = d3.get("D3,q=2") == 3 and d3.get("D3,q=3") == 8
    ok = all(c.passed for c in pc + checks(th, "regular_D3")) and spot
    verdict(2, ok, f"{len(pc)} count/total checks, regular D3 piece {d3}")


def test_criterion_3_polynomiality(suites):
    co = suites["counts"]
    poly = checks(co, "polynomiality")
    both = checks(co, "nu", "E2star", "piece")
    chars = {q_of(c) % 2 for c in both}
    ok = (poly and all(c.passed for c in poly + both) and chars == {0, 1})
    verdict(3, ok, f"{poly[0].detail['certified']} exact reductions up to D = 8, "
                   f"{len(both)} brute-force matches at q in {QLIST}")


def test_criterion_4_formula_oracles(suites):
    co = suites["counts"]
    cmp = [c for c in checks(co, *FORMULA_PREFIXES) if "oracle" in c.detail]
    kinds = {prefix(c) for c in cmp}
    ok = len({c.id for c in cmp}) >= 200 and all(c.passed for c in cmp) and kinds == set(FORMULA_PREFIXES)
    verdict(4, ok, f"{len(cmp)} comparisons, {sum(not c.passed for c in cmp)} mismatches")


def test_criterion_5_reduction_invariants(suites):
    inv = suites["invariants"]
    cs = checks(inv, "reduction_rules", "line_checks", "dickson_parity", "perp_with_radical")
    dick = checks(inv, "dickson_parity")
    ok = all(c.passed for c in cs) and dick and checks(inv, "reduction_rules")
    verdict(5, bool(ok), f"{len(cs)} checks, Dickson parity on "
                         f"{sum(c.detail['unipotents_in_O'] for c in dick)} elements of O")


def test_criterion_6_fibration(suites):
    fib = checks(suites["counts"], "fibration")
    ok = fib and all(c.passed for c in fib)
    verdict(6, bool(ok), f"{len(fib)} labels at D <= 4, q = 2")


def test_criterion_7_nonempty(suites):
    th = suites["theorem17"]
    cs = checks(th, "nonempty", "empty_nonsplit")
    ok = all(c.passed for c in cs) and checks(th, "empty_nonsplit")
    verdict(7, bool(ok), f"{len(cs)} checks")


def test_criterion_8_orbit_labels(suites):
    orb = [c for c in checks(suites["invariants"], "orbit_labels") if space_of(c)[1] % 2 == 0]
    report = {tag(c): c.detail["orbits"] for c in orb}
    ok = orb and all(c.passed for c in orb)
    print(json.dumps({tag(c): c.detail["orbit_sizes_by_label"] for c in orb}, sort_keys=True))
    verdict(8, bool(ok), f"labels constant on orbits; orbit counts {report}")


def test_criterion_9_odd_characteristic(suites):
    orb = [c for c in checks(suites["invariants"], "orbit_labels") if space_of(c)[1] % 2]
    spaces = {tag(c) for c in orb}
    want = {f"{d},q={q}" for q in (3, 5) for d in ("D2+", "D2-", "D3", "D4+", "D4-")}
    split = sorted(tag(c) for c in orb if not c.detail["pieces_are_single_orbits"])
    ok = want <= spaces and all(c.passed for c in orb)
    verdict(9, ok, f"{len(orb)} spaces, pieces constant on orbits; rational splitting in {split}")


def test_criterion_10_mutations():
    counting.P_SHIFT_MUTATION = True
    counting._nu.cache_clear()
    try:
        co = suite_counts(qlist=(2, 3), smax=6, poly_dmax=4, fib_dmax=2)
    finally:
        counting.P_SHIFT_MUTATION = False
        counting._nu.cache_clear()
    shift_caught = any(prefix(c) == "count_N" and not c.passed for c in co.checks)
    th = suite_theorem17(dmax=4, qlist=(2, 3), keep_shift=False, uniqueness=False)
    drop_caught = not th.passed
    verdict(10, shift_caught and drop_caught,
            f"misprinted shift fails {sum(not c.passed for c in co.checks)} counting checks; "
            f"unshifted line fails {len(th.failures())} bijection checks")
