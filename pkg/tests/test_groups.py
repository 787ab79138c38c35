import itertools

import numpy as np
import pytest

from sopieces.groups import (MatrixCodec, certified_generators, conjugacy_orbit, dickson,
                             enumerate_unipotents, group_closure, group_closure_keys,
                             orthogonal_order, so_generators, so_membership, so_order,
                             transvection_generators, transvections, unipotent_count)
from sopieces.linalg import Mat
from sopieces.quadspace import standard_space

from conftest import space


def test_closure_trivial(gf2):
    assert len(group_closure([Mat.identity(gf2, 3)])) == 1


@pytest.mark.parametrize("desc,q", [("D2+", 2), ("D2-", 2), ("D3", 2), ("D4+", 2), ("D4-", 2),
                                    ("D3", 3), ("D4+", 3), ("D2+", 4), ("D3", 4), ("D5", 2)])
def test_generators_reach_classical_order(desc, q):
    s = space(desc, q)
    gens = [g.a for g in transvection_generators(s)]
    keys = group_closure_keys(s.ctx, s.D, gens)
    assert keys.size == orthogonal_order(s.D, q, s.eta)


def test_O4plus2_needs_patches(gf2):
    s = standard_space(gf2, 4, "split")
    assert group_closure_keys(gf2, 4, transvections(s)).size == 36
    assert certified_generators(s).patches >= 1


def test_so_orders():
    assert so_order(3, 2, None) == 6
    assert so_order(4, 2, 1) == 36
    assert so_order(2, 2, 1) == 1


@pytest.mark.parametrize("desc,q", [("D2+", 2), ("D2-", 2), ("D4+", 2), ("D4-", 2), ("D2+", 3),
                                    ("D4-", 3), ("D2-", 4)])
def test_dickson_is_homomorphism(desc, q):
    s = space(desc, q)
    F = s.ctx
    keys = group_closure_keys(F, s.D, certified_generators(s).generators)
    mats = MatrixCodec(q, s.D).decode(keys)
    rng = np.random.default_rng(1)
    idx = rng.choice(len(mats), size=min(40, len(mats)), replace=False)
    ds = {i: dickson(s, mats[i]) for i in idx}
    for i, j in itertools.product(idx, repeat=2):
        assert dickson(s, F.matmul(mats[i], mats[j])) == (ds[i] + ds[j]) % 2
    assert sum(d == 0 for d in (dickson(s, m) for m in mats)) == so_order(s.D, q, s.eta)


def test_dickson_examples(gf2):
    s = standard_space(gf2, 2, "split")
    assert dickson(s, np.eye(2, dtype=np.int64)) == 0
    swap = np.array([[0, 1], [1, 0]])
    assert dickson(s, swap) == 1 and not so_membership(s, swap)
    with pytest.raises(ValueError):
        dickson(s, np.array([[1, 1], [0, 1]]))


def test_so3_unipotents(gf2):
    s = standard_space(gf2, 3, "odd")
    keys = group_closure_keys(gf2, 3, so_generators(s))
    assert keys.size == 6
    assert len(enumerate_unipotents(s)) == 4


@pytest.mark.parametrize("desc,q", [("D4+", 2), ("D4-", 2), ("D5", 2), ("D4+", 3), ("D3", 4)])
def test_unipotent_methods_agree(desc, q):
    s = space(desc, q)
    a = enumerate_unipotents(s, method="closure")
    b = enumerate_unipotents(s, method="sylow")
    assert np.array_equal(a, b)
    assert len(a) == unipotent_count(s)


def test_conjugacy_orbit_regular_D3(gf2):
    s = standard_space(gf2, 3, "odd")
    u = np.array([[1, 1, 0], [0, 1, 0], [0, 1, 1]])
    assert s.is_isometry(u)
    orbit = conjugacy_orbit(s, so_generators(s), u)
    assert len(orbit) == 3
