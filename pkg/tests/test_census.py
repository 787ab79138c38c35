import numpy as np
import pytest

from sopieces.census import (census, class_partition, nilpotent_shadow, piece_representative,
                             verify_theorem_1_7)
from sopieces.filtration import admissible_labels, canonical_filtration, piece_label
from sopieces.groups import dickson, unipotent_count

from conftest import beta_example, space


@pytest.mark.parametrize("desc,q", [("D2+", 2), ("D2-", 3), ("D3", 2), ("D3", 3), ("D4+", 2),
                                    ("D4-", 2), ("D5", 2)])
def test_bijection_small(desc, q):
    s = space(desc, q)
    rep = verify_theorem_1_7(s)
    assert rep.passed, rep.to_dict()
    assert rep.total == unipotent_count(s)


def test_uniqueness_search_runs_on_small_spaces():
    rep = verify_theorem_1_7(space("D3", 3))
    assert rep.uniqueness_checked == 9 and not rep.uniqueness_failures


def test_dropping_the_shift_breaks_adaptedness():
    rep = verify_theorem_1_7(space("D3", 2), keep_shift=False, uniqueness=False)
    assert not rep.passed


def test_report_is_plain_data():
    d = verify_theorem_1_7(space("D3", 2)).to_dict()
    assert d["passed"] and d["total"] == 4
    assert {p["label"] for p in d["pieces"]} == {str(l) for l in admissible_labels(3, None)}


def test_census_counts():
    cen = census(space("D3", 2))
    assert cen.n == 4
    assert sorted(cen.piece_counts.values()) == [1, 3]


def test_orbits_refine_pieces():
    rep = class_partition(space("D4+", 2))
    assert rep.constant and not rep.inconsistent
    assert sum(sum(v) for v in rep.by_label.values()) == 16


def test_odd_characteristic_pieces_can_split():
    # over GF(3) some pieces of D4+ break into several rational classes
    rep = class_partition(space("D4+", 3))
    assert rep.constant
    assert not rep.pieces_are_orbits


@pytest.mark.parametrize("desc,q", [("D3", 2), ("D4+", 2), ("D4-", 2), ("D3", 3), ("D5", 2),
                                    ("D4+", 3)])
def test_representatives(desc, q):
    s = space(desc, q)
    I = np.eye(s.D, dtype=np.int64)
    for lab in admissible_labels(s.D, s.eta):
        N = piece_representative(s, lab)
        u = s.ctx.add(I, N)
        assert s.is_isometry(u) and dickson(s, u) == 0
        assert piece_label(canonical_filtration(s, N)) == lab


def test_shadow_of_beta_example():
    s, N = beta_example()
    u = s.ctx.add(np.eye(3, dtype=np.int64), N)
    sh = nilpotent_shadow(s, u)
    # the regular class: the shadow is a nonzero square-zero map with N's Jordan type
    assert sh.nabla.any() and not s.ctx.matmul(sh.nabla, sh.nabla).any()
    assert sh.c == (1, 1, 0)
    with pytest.raises(ValueError):
        nilpotent_shadow(space("D3", 3), np.eye(3, dtype=np.int64))


def test_regular_D3_is_one_orbit():
    rep = class_partition(space("D3", 2))
    sizes = sorted(rep.by_label.values())
    assert sizes == [[1], [3]] and rep.pieces_are_orbits


def test_regular_D5_splits_rationally_in_char_2():
    rep = class_partition(space("D5", 2))
    assert rep.constant
    assert rep.by_label["(1,0,1,0,1,0,1,0,1) S={1}"] == [90, 90]
