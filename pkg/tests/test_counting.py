import pytest

from sopieces import counting
from sopieces.counting import (ODD, card_E2star, card_piece, count_N, count_totally_singular,
                               dim_d, nu, nu_eps, nu_prime, poly_A, poly_P, poly_Pd, poly_R,
                               unipotent_count_poly)
from sopieces.census import piece_representative
from sopieces.filtration import admissible_labels, canonical_filtration, graded_standard_model
from sopieces.gf import field_of_order
from sopieces.oracles import (bf_count_E2star, bf_count_E_ge2_star, bf_count_flags,
                              bf_count_subspaces, bf_count_symplectic_flags)
from sopieces.poly import CountPolynomial, qpow
from sopieces.quadspace import space_from_descriptor, standard_space

q = qpow(1)


def test_small_group_orders():
    assert poly_P(1) == CountPolynomial([1])
    assert poly_P(3) == q * (q * q - 1)
    for d in (1, -1):
        assert poly_Pd(2, d) == q - d
    assert poly_R(2) == q * (q * q - 1)
    assert poly_A(2) == q * (q - 1) * (q * q - 1)
    assert poly_R(0) == CountPolynomial([1])


@pytest.mark.parametrize("bad", [lambda: poly_P(2), lambda: poly_Pd(3, 1), lambda: poly_R(3),
                                 lambda: poly_Pd(2, 0), lambda: poly_A(-1)])
def test_parity_violations(bad):
    with pytest.raises(ValueError):
        bad()


def test_rendering():
    assert str((q * q - 1) * (q * q - 1)) == "q^4 - 2*q^2 + 1"


def test_nonsingular_lines_in_plane():
    for eps in (1, -1):
        assert count_N(2, 1, eps, ODD).to_polynomial() == q - eps
    F = field_of_order(2)
    assert bf_count_subspaces(standard_space(F, 2, "split"), 1) == 1
    assert bf_count_subspaces(standard_space(F, 2, "nonsplit"), 1) == 3


def test_split_planes_in_split_four_space():
    F = field_of_order(2)
    val = count_N(4, 2, 1, 1).at(2)
    assert val == bf_count_subspaces(standard_space(F, 4, "split"), 2, 1)


def test_trivial_cases():
    assert count_N(5, 5, ODD, ODD).at(3) == 1
    assert count_N(4, 0, 1, ODD).at(2) == 1
    assert count_N(4, 4, 1, -1).at(2) == 0
    with pytest.raises(ValueError):
        count_N(4, 1, ODD, ODD)
    with pytest.raises(ValueError):
        count_N(3, 2, ODD, ODD)


@pytest.mark.parametrize("qq", [2, 3])
@pytest.mark.parametrize("s,k", [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3), (5, 2)])
def test_count_N_against_scan(qq, s, k):
    F = field_of_order(qq)
    for left in ((ODD,) if s % 2 else (1, -1)):
        form = standard_space(F, s, "odd" if left is ODD else ("split" if left == 1 else "nonsplit"))
        for right in ((ODD,) if k % 2 else (1, -1)):
            want = bf_count_subspaces(form, k, None if right is ODD else right)
            assert count_N(s, k, left, right).at(qq) == want, (s, k, left, right)


def test_misprinted_shift_is_caught():
    F = field_of_order(2)
    form = standard_space(F, 4, "split")
    counting.P_SHIFT_MUTATION = True
    try:
        wrong = count_N(4, 1, 1, ODD).at(2)
    finally:
        counting.P_SHIFT_MUTATION = False
    assert wrong != bf_count_subspaces(form, 1)
    assert count_N(4, 1, 1, ODD).at(2) == bf_count_subspaces(form, 1)


def test_flag_counts():
    assert nu(3) == CountPolynomial([1])
    assert nu_prime(2, 2) == CountPolynomial([1])
    assert nu_prime(4, 2) == q * q * (q * q + 1)
    assert nu_prime(4, 2).at(2) == 20
    assert bf_count_symplectic_flags(field_of_order(2), [4, 2]) == 20
    for eps in (1, -1):
        assert nu_eps(eps, 2, 1) == q - eps


@pytest.mark.parametrize("chain,kind", [((3, 1), ODD), ((3, 2), ODD), ((4, 2), 1), ((4, 2), -1),
                                        ((4, 2, 1), 1), ((5, 2), ODD), ((4, 3, 1), -1)])
def test_flag_counts_against_scan(chain, kind):
    F = field_of_order(2)
    name = "odd" if kind is ODD else ("split" if kind == 1 else "nonsplit")
    form = standard_space(F, chain[0], name)
    poly = nu(*chain) if kind is ODD else nu_eps(kind, *chain)
    assert poly.at(2) == bf_count_flags(form, list(chain))


def test_descending_required():
    with pytest.raises(ValueError):
        nu(1, 3)
    with pytest.raises(ValueError):
        nu_prime(4, 3)


def test_dim_d():
    assert dim_d({-1: 2, 0: 1, 1: 2}) == 0
    assert dim_d({-2: 1, 0: 1, 2: 1}) == 0
    # only the pair (-3, -1) qualifies, plus one choose-two term at -3
    assert dim_d({-3: 2, -1: 2, 1: 2, 3: 2}) == 2 * 2 + 1


def test_fibre_dimension_matches_cardinality_quotient():
    s = space_from_descriptor("D5", 2)
    for lab in admissible_labels(5, None):
        N = piece_representative(s, lab)
        filt = canonical_filtration(s, N)
        model = graded_standard_model(s.ctx, lab.dims, "odd" if lab.at(0) else None)
        ratio, rem = divmod(bf_count_E_ge2_star(filt), bf_count_E2star(model))
        assert rem == 0 and ratio == 2 ** dim_d(lab), lab


def test_E2star_examples():
    assert card_E2star({0: 5}) == CountPolynomial([1])
    assert card_E2star({-2: 1, 0: 1, 2: 1}) == q - 1
    for eps in (1, -1):
        assert card_E2star({-2: 1, 0: 2, 2: 1}, eps) == (q - 1) * (q - eps)
    F = field_of_order(2)
    assert bf_count_E2star(graded_standard_model(F, {-2: 1, 0: 1, 2: 1}, "odd")) == 1
    assert bf_count_E2star(graded_standard_model(F, {-2: 1, 0: 2, 2: 1}, "split")) == 1


def test_piece_examples():
    for D, eta, kind in [(3, None, ODD), (4, 1, 1), (5, None, ODD)]:
        trivial = [lab for lab in admissible_labels(D, eta) if lab.at(0) == D]
        assert card_piece(trivial[0], kind) == CountPolynomial([1])
    regular = [lab for lab in admissible_labels(3, None) if lab.at(2) == 1][0]
    assert card_piece(regular, ODD) == q * q - 1


@pytest.mark.parametrize("D", [2, 3, 4, 5, 6, 7, 8])
def test_pieces_sum_to_unipotent_count(D):
    for eta in ((1, -1) if D % 2 == 0 else (None,)):
        kind = ODD if eta is None else eta
        total = CountPolynomial([])
        for lab in admissible_labels(D, eta):
            total = total + card_piece(lab, kind)
        assert total == unipotent_count_poly(D, kind), (D, eta)


def test_totally_singular_counts():
    # maximal isotropic subspaces of the split 4-space: two lines of planes, q+1 each
    assert count_totally_singular(4, 1, 2) == 2 * (q + 1)
    assert count_totally_singular(4, -1, 2) == CountPolynomial([])
    assert count_totally_singular(3, ODD, 1) == q + 1
