import pytest

from sopieces import counting
from sopieces.verify import (enumeration_range, in_required_range, run_suites, suite_counts,
                             suite_invariants, suite_theorem17, xi_rule)


def _without_volume(res):
    # the 200-comparison floor only applies to the full run
    return [c for c in res.failures() if c.id != "oracle_comparisons_at_least_200"]


def test_required_range_is_enumerated():
    rng = enumeration_range(7, (2, 3, 4, 5))
    for D in range(2, 8):
        for q in (2, 3, 4, 5):
            if in_required_range(D, q):
                assert (D, q) in rng
    assert (7, 3) not in rng


def test_bijection_suite_small():
    res = suite_theorem17(dmax=4, qlist=(2, 3))
    assert res.passed, res.failures()[:2]
    ids = {c.id.split("[")[0] for c in res.checks}
    assert {"adapted", "partition", "piece_counts", "total", "nonempty", "empty_nonsplit",
            "uniqueness", "regular_D3"} <= ids


def test_bijection_suite_detects_unshifted_filtration():
    res = suite_theorem17(dmax=3, qlist=(2,), keep_shift=False, uniqueness=False)
    assert not res.passed


def test_counts_suite_small():
    res = suite_counts(qlist=(2, 3), smax=4, poly_dmax=5, fib_dmax=3)
    assert not _without_volume(res), _without_volume(res)[:2]


def test_counts_suite_detects_misprint():
    counting.P_SHIFT_MUTATION = True
    counting._nu.cache_clear()
    try:
        res = suite_counts(qlist=(2,), smax=4, poly_dmax=4, fib_dmax=2)
    finally:
        counting.P_SHIFT_MUTATION = False
        counting._nu.cache_clear()
    bad = _without_volume(res)
    assert any(c.id.startswith("count_N[s=4,k=1") for c in bad)


def test_invariants_suite_small():
    res = suite_invariants(dmax=4, qlist=(2,), orbit_dmax=4)
    assert res.passed, res.failures()[:2]


@pytest.mark.parametrize("c,eps,a,want", [
    ((0, 1), (0, 0), 2, 1),              # c_2 odd
    ((0, 0, 0, 1), (0, 0, 0, 0), 2, 1),  # c_2 even, one odd c_b above
    ((0, 2), (0, 1), 2, 1),              # everything even: falls back to eps
    ((0, 2), (0, 0), 2, 0),
])
def test_xi_rule_examples(c, eps, a, want):
    assert xi_rule(c, eps, a) == want


def test_report_shape():
    (res,) = run_suites(["theorem17"], dmax=3, qlist=(2,))
    d = res.to_dict()
    assert set(d) == {"suite", "passed", "checks", "failed", "seconds", "counterexample", "results"}
    assert d["passed"] and d["counterexample"] is None
