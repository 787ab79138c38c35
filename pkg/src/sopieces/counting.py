"""Closed-form point counts: group orders, nondegenerate subspaces, flags and pieces."""
from __future__ import annotations

import itertools
from functools import lru_cache

from .poly import ONE, CountPolynomial, NonIntegralCount, RationalCount, qpow

ODD = None   # type marker for odd-dimensional spaces


def _need(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def _prod_q_minus(exps, shift=1) -> CountPolynomial:
    out = ONE
    for n in exps:
        out = out * (qpow(n) - shift)
    return out


@lru_cache(maxsize=None)
def poly_P(m: int) -> CountPolynomial:
    """q^{((m-1)/2)^2} (q^2-1)(q^4-1)...(q^{m-1}-1) for odd m."""
    _need(m >= 1 and m % 2 == 1, "P_m needs odd m >= 1")
    e4 = m * m - 2 * m + 1
    assert e4 % 4 == 0
    return qpow(e4 // 4) * _prod_q_minus(range(2, m, 2))


@lru_cache(maxsize=None)
def poly_Pd(m: int, delta: int) -> CountPolynomial:
    """q^{m(m-2)/4} (q^2-1)...(q^{m-2}-1)(q^{m/2}-delta) for even m >= 2."""
    _need(m >= 2 and m % 2 == 0, "P_m^delta needs even m >= 2")
    _need(delta in (1, -1), "delta must be +1 or -1")
    e4 = m * m - 2 * m
    assert e4 % 4 == 0
    return qpow(e4 // 4) * _prod_q_minus(range(2, m - 1, 2)) * (qpow(m // 2) - delta)


@lru_cache(maxsize=None)
def poly_R(m: int) -> CountPolynomial:
    """Order of Sp_m: q^{m^2/4} (q^2-1)(q^4-1)...(q^m-1)."""
    _need(m >= 0 and m % 2 == 0, "R_m needs even m >= 0")
    return qpow(m * m // 4) * _prod_q_minus(range(2, m + 1, 2))


@lru_cache(maxsize=None)
def poly_A(m: int) -> CountPolynomial:
    """Order of GL_m: q^{m(m-1)/2} (q-1)(q^2-1)...(q^m-1)."""
    _need(m >= 0, "A_m needs m >= 0")
    return qpow(m * (m - 1) // 2) * _prod_q_minus(range(1, m + 1))


# ---------------------------------------------------------------- nondegenerate subspaces

P_SHIFT_MUTATION = False   # when set, reproduces the literal misprint in the odd-in-even count


def count_N(s: int, k: int, left, right) -> RationalCount:
    """Number of k-dim subspaces with nondegenerate restriction, refined by type.

    `left` is the type (+1/-1) of the s-dim ambient space, or ODD when s is odd;
    `right` is the type of the subspace when k is even and >= 2, else ODD.
    """
    _need(0 <= k <= s, "need 0 <= k <= s")
    if s % 2:
        _need(left is ODD, "odd ambient dimension has no type")
    else:
        _need(left in (1, -1), "even ambient dimension needs a type")
    if k % 2 or k == 0:
        _need(right is ODD or k == 0, "odd subspace dimension has no type")
    else:
        _need(right in (1, -1), "even subspace dimension needs a type")
    if k == 0:
        return RationalCount(ONE)
    if k == s:
        if s % 2:
            return RationalCount(ONE)
        return RationalCount(ONE if left == right else CountPolynomial([]))
    R = RationalCount
    if s % 2 == 0 and k % 2 == 1:
        if P_SHIFT_MUTATION:
            m = s // 2 - k
            tail = poly_P(m) if m >= 1 and m % 2 else ONE
        else:
            tail = poly_P(s - k)
        return R(poly_Pd(s, left)) / R(poly_P(k)) / R(tail)
    if s % 2 == 0:
        return R(poly_Pd(s, left)) / R(poly_Pd(k, right)) / R(poly_Pd(s - k, left * right)) / 2
    if k % 2 == 1:
        total = R(CountPolynomial([]))
        for d in (1, -1):
            total = total + R(poly_P(s)) / R(poly_P(k)) / R(poly_Pd(s - k, d))
        return total / 2
    return R(poly_P(s)) / R(poly_Pd(k, right)) / R(poly_P(s - k)) / 2


def _types(dim):
    return (ODD,) if dim % 2 or dim == 0 else (1, -1)


def _chain_sum(rs, eps) -> RationalCount:
    """Sum over the types of the intermediate subspaces of products of count_N."""
    total = RationalCount(CountPolynomial([]))
    choices = [_types(r) for r in rs[1:]]
    for types in itertools.product(*choices):
        term = RationalCount(ONE)
        prev = eps
        for s, k, t in zip(rs, rs[1:], types):
            term = term * count_N(s, k, prev, t if k else ODD)
            prev = t
        total = total + term
    return total


def _normalize_chain(rs):
    rs = [int(r) for r in rs]
    _need(all(a >= b for a, b in zip(rs, rs[1:])), "dimensions must be descending")
    _need(all(r >= 0 for r in rs), "dimensions must be nonnegative")
    return [r for r in rs if r > 0]


@lru_cache(maxsize=None)
def _nu(rs: tuple, eps) -> CountPolynomial:
    rs = list(rs)
    if len(rs) <= 1:
        return ONE
    # repeated dimensions contribute nothing new
    for i in range(len(rs) - 1):
        if rs[i] == rs[i + 1]:
            return _nu(tuple(rs[:i + 1] + rs[i + 2:]), eps)
    # an interior odd dimension splits the chain
    for i in range(1, len(rs) - 1):
        if rs[i] % 2:
            return _nu(tuple(rs[:i + 1]), eps) * _nu(tuple(rs[i:]), ODD)
    return _chain_sum(rs, eps).to_polynomial()


def nu(*rs) -> CountPolynomial:
    """Chains U_0 > U_2 > ... of nondegenerate subspaces of an odd-dimensional space."""
    rs = _normalize_chain(rs)
    _need(bool(rs) and rs[0] % 2 == 1, "nu needs odd r_0")
    return _nu(tuple(rs), ODD)


def nu_eps(eps: int, *rs) -> CountPolynomial:
    """As nu, in an even-dimensional space of type eps."""
    rs = _normalize_chain(rs)
    _need(bool(rs) and rs[0] % 2 == 0, "nu_eps needs even r_0 >= 2")
    _need(eps in (1, -1), "eps must be +1 or -1")
    return _nu(tuple(rs), eps)


def nu_prime(*rs) -> CountPolynomial:
    """Chains of nondegenerate subspaces of a symplectic space of dim r_1."""
    rs = _normalize_chain(rs)
    _need(all(r % 2 == 0 for r in rs), "nu' needs even dimensions")
    if not rs:
        return ONE
    num = RationalCount(poly_R(rs[0]))
    for a, b in zip(rs, rs[1:] + [0]):
        num = num / RationalCount(poly_R(a - b))
    return num.to_polynomial()


# ---------------------------------------------------------------- labels

def _dims(f) -> dict:
    if hasattr(f, "dims"):
        return dict(f.dims)
    return {a: d for a, d in dict(f).items() if d}


def _at(dims, a):
    return dims.get(a, 0)


def dim_d(f) -> int:
    """Dimension of the fibres of E^{>=2} over its graded part."""
    dims = _dims(f)
    degs = sorted(dims)
    d = 0
    for a in degs:
        for ap in degs:
            if a < ap and -a - ap >= 3:
                d += dims[a] * dims[ap]
        if -2 * a >= 4:
            d += dims[a] * (dims[a] - 1) // 2
    return d


def _top(dims):
    return max((abs(a) for a in dims), default=0)


def card_E2star(f, eps=ODD) -> CountPolynomial:
    """Number of graded maps in E^2_* for graded dimensions f.

    eps is the type of the degree-0 part when f_0 is even and positive.
    """
    dims = _dims(f)
    M = _top(dims)
    out = ONE
    for a in range(1, M + 1):
        out = out * poly_A(_at(dims, a))
    f0 = _at(dims, 0)
    evens = [_at(dims, a) for a in range(0, M + 1, 2)]
    odds = [_at(dims, a) for a in range(1, M + 1, 2)]
    if f0 % 2:
        xi = nu(*evens)
    elif f0 >= 2:
        _need(eps in (1, -1), "even f_0 needs the type of the degree-0 part")
        xi = nu_eps(eps, *evens)
    else:
        xi = ONE
    rat = RationalCount(out * xi * nu_prime(*odds)) / RationalCount(poly_R(odds[0] if odds else 0))
    return rat.to_polynomial()


def singular_vectors(n: int, kind) -> CountPolynomial:
    """Number of singular vectors (including 0) in a nondegenerate n-dim space."""
    if n == 0:
        return ONE
    if n % 2:
        return qpow(n - 1)
    w = n // 2
    sign = 1 if kind == 1 else -1
    return qpow(n - 1) + sign * (qpow(w) - qpow(w - 1))


@lru_cache(maxsize=None)
def count_totally_singular(n: int, kind, k: int) -> CountPolynomial:
    """Number of k-dim totally singular subspaces of a nondegenerate n-dim space."""
    if k == 0:
        return ONE
    num = RationalCount(ONE)
    for i in range(k):
        # vectors completing a totally singular i-space to an (i+1)-space
        num = num * RationalCount(qpow(i) * (singular_vectors(n - 2 * i, kind) - 1))
    return (num / RationalCount(poly_A(k))).to_polynomial()


def card_Ybar(f, kind, component=None) -> CountPolynomial:
    """Number of Q-filtrations with graded dimensions f (one component if given)."""
    dims = _dims(f)
    M = _top(dims)
    n = sum(dims.values())
    out = ONE
    for a in range(M, 0, -1):
        k = _at(dims, a)
        out = out * count_totally_singular(n, kind if n % 2 == 0 else ODD, k)
        n -= 2 * k
    if component is not None:
        out = (RationalCount(out) / 2).to_polynomial()
    return out


def card_piece(label, kind) -> CountPolynomial:
    """Predicted number of unipotents in the piece with this label.

    kind is +1 / -1 for even D, ODD for odd D.
    """
    dims = _dims(label)
    comp = getattr(label, "component", None)
    D = sum(dims.values())
    if D % 2 == 0:
        _need(kind in (1, -1), "even D needs a type")
        if _at(dims, 0) == 0 and D > 0 and kind == -1:
            return CountPolynomial([])
    e2 = card_E2star(dims, kind if _at(dims, 0) % 2 == 0 else ODD)
    return card_Ybar(dims, kind, comp) * qpow(dim_d(dims)) * e2


def unipotent_count_poly(D: int, kind) -> CountPolynomial:
    """q^{dim - rank} for SO_D."""
    r = D // 2
    dim = D * (D - 1) // 2
    return qpow(dim - r)


__all__ = [
    "NonIntegralCount", "poly_P", "poly_Pd", "poly_R", "poly_A", "count_N", "nu", "nu_eps",
    "nu_prime", "dim_d", "card_E2star", "card_Ybar", "card_piece", "count_totally_singular",
    "singular_vectors", "unipotent_count_poly", "ODD",
]
