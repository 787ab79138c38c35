import itertools

import numpy as np
import pytest

from sopieces.gf import FieldCtx, field_of_order, make_field, sqrt_char2, trace


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9, 16])
def test_field_axioms(q):
    F = field_of_order(q)
    xs = np.arange(q)
    a, b, c = np.meshgrid(xs, xs, xs, indexing="ij")
    assert np.array_equal(F.mul(F.mul(a, b), c), F.mul(a, F.mul(b, c)))
    assert np.array_equal(F.add(F.add(a, b), c), F.add(a, F.add(b, c)))
    assert np.array_equal(F.mul(a, F.add(b, c)), F.add(F.mul(a, b), F.mul(a, c)))
    assert np.array_equal(F.mul(a, b), F.mul(b, a))
    nz = xs[1:]
    assert (F.mul(nz, F.inv(nz)) == 1).all()
    # characteristic p and x^q = x
    for x in F.elements():
        assert sum([x] * F.p, F(0)) == F(0)
        assert x ** q == x


def test_small_moduli():
    assert make_field(2, 2).modulus[:3] == (1, 1, 1)
    assert make_field(2, 1).q == 2
    F9 = make_field(3, 2)
    assert all(x ** 8 == F9(1) for x in F9.elements()[1:])


def test_rejects_bad_orders():
    with pytest.raises(ValueError):
        field_of_order(6)
    with pytest.raises(ValueError):
        FieldCtx(4, 1)
    with pytest.raises(ValueError):
        FieldCtx(2, 7)


@pytest.mark.parametrize("q", [2, 4, 8, 16])
def test_sqrt_char2(q):
    F = field_of_order(q)
    for x in F.elements():
        assert sqrt_char2(x) * sqrt_char2(x) == x
    for x, y in itertools.product(F.elements(), repeat=2):
        assert sqrt_char2(x * y) == sqrt_char2(x) * sqrt_char2(y)


def test_sqrt_needs_char2():
    with pytest.raises(ValueError):
        sqrt_char2(field_of_order(3)(1))


def test_sqrt_gf4_generator():
    F = field_of_order(4)
    g = F(2)
    assert sqrt_char2(g) == g * g


def test_trace_values():
    F2, F4, F9 = field_of_order(2), field_of_order(4), field_of_order(9)
    assert [int(trace(x)) for x in F2.elements()] == [0, 1]
    assert [int(trace(x)) for x in F4.elements()] == [0, 0, 1, 1]
    assert sum(int(trace(x)) == 0 for x in F9.elements()) == 3
