
import numpy as np
import pytest

from sopieces.gf import field_of_order
from sopieces.linalg import Subspace, all_vectors
from sopieces.oracles import bf_isometry_order
from sopieces.quadspace import (QuadForm, parse_descriptor, quotient_form, space_from_descriptor,
                                standard_space, witt_type)


def singular_lines(s):
    return sum(1 for v in all_vectors(s.ctx.q, s.D)[1:] if s.Q(v) == 0) // (s.ctx.q - 1)


def test_standard_D2(gf2):
    sp = standard_space(gf2, 2, "split")
    ns = standard_space(gf2, 2, "nonsplit")
    assert singular_lines(sp) == 2
    assert singular_lines(ns) == 0
    assert all(ns.Q(v) == 1 for v in all_vectors(2, 2)[1:])


def test_odd_radical(gf2):
    s = standard_space(gf2, 3, "odd")
    assert s.radical == Subspace(gf2, 3, [[0, 0, 1]])
    assert s.Q([0, 0, 1]) == 1
    assert s.is_nondegenerate() and s.eta is None


@pytest.mark.parametrize("q", [2, 3, 4, 5])
@pytest.mark.parametrize("D", [2, 3, 4, 5])
def test_polarization_and_types(q, D):
    F = field_of_order(q)
    for kind in (("split", "nonsplit") if D % 2 == 0 else ("odd",)):
        s = standard_space(F, D, kind)
        assert s.is_nondegenerate()
        vs = all_vectors(q, D)
        rng = np.random.default_rng(D * q)
        for _ in range(30):
            x, y = vs[rng.integers(len(vs))], vs[rng.integers(len(vs))]
            assert s.B(x, y) == F.s_sub(F.s_sub(s.Q(F.add(x, y)), s.Q(x)), s.Q(y))
        if q % 2 == 0:
            assert not np.diag(s.bilinear).any()
        if D % 2 == 0:
            assert witt_type(s) == (1 if kind == "split" else -1)
            assert s.eta == witt_type(s)
        else:
            assert s.radical.dim == (1 if q % 2 == 0 else 0)


def test_witt_type_sum_of_squares(gf3):
    assert witt_type(QuadForm(gf3, [[1, 0], [0, 1]])) == -1
    with pytest.raises(ValueError):
        witt_type(standard_space(gf3, 3, "odd"))


def test_perp_examples(gf2):
    s = standard_space(gf2, 4, "split")
    assert s.perp(Subspace.zero(gf2, 4)).dim == 4
    odd = standard_space(gf2, 3, "odd")
    assert odd.perp(odd.radical).dim == 3
    # split D=4 is the sum of the planes on coordinates (0,1) and (2,3)
    P = Subspace(gf2, 4, [[1, 0, 0, 0], [0, 1, 0, 0]])
    assert s.perp(P) == Subspace(gf2, 4, [[0, 0, 1, 0], [0, 0, 0, 1]])


def test_restrict(gf2):
    s = standard_space(gf2, 2, "split")
    assert s.restrict(Subspace.full(gf2, 2))[1]
    assert not s.restrict(Subspace(gf2, 2, [[1, 0]]))[1]
    s4 = standard_space(gf2, 4, "split")
    assert s4.restrict(Subspace(gf2, 4, [[1, 1, 0, 0]]))[1]


def test_quotient_form(gf2):
    s = standard_space(gf2, 4, "split")
    q0, _ = quotient_form(s, Subspace.zero(gf2, 4))
    assert q0.D == 4
    q1, _ = quotient_form(s, Subspace(gf2, 4, [[1, 0, 0, 0]]))
    assert q1.D == 2 and witt_type(q1) == 1
    odd = standard_space(gf2, 3, "odd")
    q2, _ = quotient_form(odd, Subspace(gf2, 3, [[1, 0, 0]]))
    assert q2.D == 1 and q2.radical.dim == 1 and q2.Q([1]) == 1
    with pytest.raises(ValueError):
        quotient_form(odd, Subspace(gf2, 3, [[0, 0, 1]]))


def test_descriptors():
    assert parse_descriptor("D4+") == (4, "split")
    assert parse_descriptor("D5") == (5, "odd")
    assert space_from_descriptor("D6-", 2).eta == -1
    for bad in ("D4", "D3+", "X3", "D"):
        with pytest.raises(ValueError):
            parse_descriptor(bad)


@pytest.mark.parametrize("desc,q,order", [("D2+", 2, 2), ("D3", 2, 6), ("D4+", 2, 72),
                                          ("D2-", 3, 8), ("D3", 3, 48)])
def test_isometry_orders_brute_force(desc, q, order):
    assert bf_isometry_order(space_from_descriptor(desc, q)) == order
