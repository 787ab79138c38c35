import itertools

import numpy as np
import pytest

from sopieces.gf import field_of_order
from sopieces.linalg import (Mat, Quotient, Subspace, all_vectors, image, intersect, inverse,
                             kernel, quotient_map, rank, rref, solve, sum_spaces)


def J(F, n):
    a = np.zeros((n, n), dtype=np.int64)
    for i in range(n - 1):
        a[i, i + 1] = 1
    return Mat(F, a)


def test_kernel_image_basics(gf2):
    Z = Mat.zeros(gf2, 3)
    assert kernel(Z).dim == 3 and image(Z).dim == 0
    assert kernel(Mat.identity(gf2, 3)).dim == 0
    J3 = J(gf2, 3)
    assert kernel(J3).dim == 1
    assert kernel(J3 @ J3).dim == 2


@pytest.mark.parametrize("q", [2, 3, 4])
def test_rank_nullity_random(q):
    F = field_of_order(q)
    rng = np.random.default_rng(q)
    for _ in range(40):
        m = Mat(F, rng.integers(0, q, size=(4, 5)))
        assert kernel(m).dim + image(m).dim == 5
        for v in kernel(m).basis:
            assert not F.matmul(m.a, v).any()


def test_solve(gf3):
    m = Mat(gf3, [[1, 2], [0, 1]])
    x = solve(m, [1, 1])
    assert np.array_equal(gf3.matmul(m.a, x), [1, 1])
    assert solve(Mat(gf3, [[1, 1], [1, 1]]), [0, 1]) is None
    with pytest.raises(ValueError):
        solve(m, [1, 1, 1])


def test_inverse_roundtrip(gf3):
    m = np.array([[1, 2, 0], [0, 1, 1], [2, 0, 1]])
    assert np.array_equal(gf3.matmul(m, inverse(gf3, m)), np.eye(3, dtype=np.int64))


def test_rref_canonical(gf2):
    a = Subspace(gf2, 4, [[1, 1, 0, 0], [0, 1, 1, 0]])
    b = Subspace(gf2, 4, [[1, 0, 1, 0], [1, 1, 0, 0], [0, 1, 1, 0]])
    assert a == b and hash(a) == hash(b)
    R, piv = rref(gf2, b.basis)
    assert np.array_equal(R, a.basis) and piv == (0, 1)


def test_quotient_map_examples(gf2):
    proj, sec = quotient_map(4, Subspace(gf2, 4, [[1, 1, 0, 0]]))
    assert proj.rows == 3 and rank(gf2, proj.a) == 3
    assert (proj @ sec).is_identity()
    p0, _ = quotient_map(3, Subspace.zero(gf2, 3))
    assert p0.is_identity()
    pf, _ = quotient_map(3, Subspace.full(gf2, 3))
    assert pf.rows == 0


def test_quotient_object(gf3):
    big = Subspace(gf3, 4, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])
    small = Subspace(gf3, 4, [[1, 1, 0, 0]])
    Qt = Quotient(big, small)
    assert Qt.dim == 2
    for y in all_vectors(3, 2):
        assert np.array_equal(Qt.project(Qt.lift(y)), y)
    assert Qt.pullback(np.zeros((0, 2), dtype=np.int64)) == small


def test_lattice_operations(gf3):
    a = Subspace(gf3, 2, [[1, 0]])
    b = Subspace(gf3, 2, [[1, 1]])
    assert (a + b).dim == 2 and (a & b).dim == 0
    assert a & a == a and a + Subspace.zero(gf3, 2) == a


def test_dimension_formula_exhaustive(gf2):
    # all pairs of 2-dim subspaces of GF(2)^4
    planes = set()
    for u, v in itertools.combinations(all_vectors(2, 4)[1:], 2):
        s = Subspace(gf2, 4, [u, v])
        if s.dim == 2:
            planes.add(s)
    planes = sorted(planes, key=lambda s: s.basis.tobytes())
    assert len(planes) == 35
    for a, b in itertools.product(planes, repeat=2):
        assert a.dim + b.dim == (a + b).dim + intersect(a, b).dim


def test_modular_law_sampled(gf2):
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b, c = (Subspace(gf2, 5, rng.integers(0, 2, size=(rng.integers(0, 4), 5)))
                   for _ in range(3))
        if a.issubset(c):
            assert (a + (b & c)) == ((a + b) & c)
    assert sum_spaces(a, b, c) == a + b + c


def test_matrix_text_roundtrip(gf3):
    m = Mat(gf3, [[1, 2], [0, 1], [2, 2]])
    assert Mat.from_text(m.to_text()) == m
    with pytest.raises(ValueError):
        Mat.from_text("2 2 3\n1 2 0")
    with pytest.raises(ValueError):
        Mat.from_text(m.to_text(), field_of_order(2))


def test_dimension_mismatch(gf2):
    with pytest.raises(ValueError):
        Mat.identity(gf2, 2) @ Mat.identity(gf2, 3)
