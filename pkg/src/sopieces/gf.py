"""Small finite fields GF(p^k), q <= 64.

Elements are integers in [0, q): the base-p digits (little-endian) are the
coefficients of a polynomial in x reduced modulo a fixed irreducible.
Vectorised operations work on numpy int64 arrays of such encodings.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_Q = 64


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _digits(v: int, p: int, k: int) -> list[int]:
    out = []
    for _ in range(k):
        out.append(v % p)
        v //= p
    return out


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m (coefficient lists, ascending)."""
    a = list(a)
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    r = [x % p for x in a[:dm]]
    return r + [0] * (dm - len(r))


def _is_irreducible(m: list[int], p: int) -> bool:
    k = len(m) - 1
    for d in range(1, k // 2 + 1):
        for enc in range(p ** d, 2 * p ** d):
            div = _digits(enc, p, d + 1)
            if not any(_poly_mod(m, div, p)):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Monic irreducible of degree k with the smallest integer encoding."""
    for enc in range(p ** k, 2 * p ** k):
        m = _digits(enc, p, k + 1)
        if _is_irreducible(m, p):
            return tuple(m)
    raise AssertionError("no irreducible polynomial found")


class FieldCtx:
    """Arithmetic tables and vectorised operations for one finite field."""

    def __init__(self, p: int, k: int):
        if not is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if k < 1 or p ** k > MAX_Q:
            raise ValueError(f"GF({p}^{k}) outside supported range q <= {MAX_Q}")
        self.p = p
        self.k = k
        self.q = q = p ** k
        self.modulus = smallest_irreducible(p, k)
        digits = [_digits(v, p, k) for v in range(q)]
        pw = [p ** i for i in range(k)]

        def enc(ds):
            return sum(d * w for d, w in zip(ds, pw))

        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(q):
                add[a, b] = enc([(x + y) % p for x, y in zip(digits[a], digits[b])])
                prod = [0] * (2 * k - 1)
                for i, x in enumerate(digits[a]):
                    if x:
                        for j, y in enumerate(digits[b]):
                            prod[i + j] += x * y
                mul[a, b] = enc(_poly_mod(prod, list(self.modulus), p))
        neg = np.array([enc([(-d) % p for d in digits[a]]) for a in range(q)], dtype=np.int64)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        self.add_table = add
        self.mul_table = mul
        self.neg_table = neg
        self.inv_table = inv
        self.sub_table = add[:, neg]
        # x -> x^p, and its inverse (the char-2 square root when p = 2)
        frob = np.array([self._pow_scalar(a, p) for a in range(q)], dtype=np.int64)
        root = np.zeros(q, dtype=np.int64)
        root[frob] = np.arange(q)
        self.frob_table = frob
        self.root_table = root
        squares = np.zeros(q, dtype=bool)
        squares[mul[np.arange(q), np.arange(q)]] = True
        self.square_mask = squares
        for t in (add, mul, neg, inv, frob, root, squares):
            t.setflags(write=False)
        self._mul_l = mul.tolist()
        self._add_l = add.tolist()
        self._inv_l = inv.tolist()
        self._neg_l = neg.tolist()

    def __repr__(self):
        return f"GF({self.q})"

    def _pow_scalar(self, a: int, n: int) -> int:
        r = 1
        for _ in range(n):
            r = int(self.mul_table[r, a])
        return r

    # scalar helpers on python ints
    def s_add(self, a, b):
        return self._add_l[a][b]

    def s_sub(self, a, b):
        return self._add_l[a][self._neg_l[b]]

    def s_mul(self, a, b):
        return self._mul_l[a][b]

    def s_neg(self, a):
        return self._neg_l[a]

    def s_inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return self._inv_l[a]

    def s_pow(self, a, n):
        if n < 0:
            a, n = self.s_inv(a), -n
        r = 1
        while n:
            if n & 1:
                r = self._mul_l[r][a]
            a = self._mul_l[a][a]
            n >>= 1
        return r

    def sqrt2(self, a):
        if self.p != 2:
            raise ValueError("square root via Frobenius needs characteristic 2")
        return int(self.root_table[a])

    def trace(self, a) -> int:
        t, x = 0, int(a)
        for _ in range(self.k):
            t = self._add_l[t][x]
            x = int(self.frob_table[x])
        return t

    def is_square(self, a) -> bool:
        return bool(self.square_mask[a])

    def elements(self):
        return [FieldElement(self, v) for v in range(self.q)]

    def __call__(self, v) -> "FieldElement":
        return FieldElement(self, v)

    # vectorised operations on int64 arrays
    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        if self.p == 2:
            return np.bitwise_xor(a, b)
        return self.add_table[a, b]

    def sub(self, a, b):
        if self.k == 1:
            return (a - b) % self.p
        if self.p == 2:
            return np.bitwise_xor(a, b)
        return self.sub_table[a, b]

    def neg(self, a):
        if self.k == 1:
            return (-a) % self.p
        return self.neg_table[a]

    def mul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        return self.mul_table[a, b]

    def inv(self, a):
        return self.inv_table[a]

    def sum(self, a, axis=None):
        """Field sum along an axis."""
        a = np.asarray(a)
        if self.k == 1:
            return a.sum(axis=axis) % self.p
        if self.p == 2:
            return np.bitwise_xor.reduce(a, axis=axis)
        if axis is None:
            a = a.reshape(-1)
            axis = 0
        a = np.moveaxis(a, axis, 0)
        acc = np.zeros(a.shape[1:], dtype=np.int64)
        for row in a:
            acc = self.add_table[acc, row]
        return acc

    def matmul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.k == 1:
            return (A @ B) % self.p
        vec_a = A.ndim == 1
        vec_b = B.ndim == 1
        A2 = A[None, :] if vec_a else A
        B2 = B[:, None] if vec_b else B
        if A2.shape[1] == 0:
            out = np.zeros((A2.shape[0], B2.shape[1]), dtype=np.int64)
        else:
            out = self.sum(self.mul_table[A2[:, :, None], B2[None, :, :]], axis=1)
        if vec_a and vec_b:
            return out[0, 0]
        if vec_a:
            return out[0]
        if vec_b:
            return out[:, 0]
        return out

    def bmatmul(self, A, B):
        """Batched matrix product over the last two axes."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.k == 1:
            return np.matmul(A, B) % self.p
        return self.sum(self.mul_table[A[..., :, :, None], B[..., None, :, :]], axis=-2)

    def dot(self, x, y):
        return int(self.sum(self.mul(np.asarray(x), np.asarray(y))))


class FieldElement:
    """A value of a FieldCtx with operator overloads (convenience API)."""

    __slots__ = ("ctx", "value")

    def __init__(self, ctx: FieldCtx, value: int):
        value = int(value)
        if not 0 <= value < ctx.q:
            raise ValueError(f"{value} is not an element encoding of GF({ctx.q})")
        self.ctx = ctx
        self.value = value

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.ctx is not self.ctx:
                raise ValueError("elements of different fields")
            return other.value
        if isinstance(other, int):
            # integers map through the prime subfield
            return other % self.ctx.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.s_add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.s_sub(self.value, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.s_sub(o, self.value))

    def __mul__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.s_mul(self.value, o))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.ctx, self.ctx.s_neg(self.value))

    def __truediv__(self, other):
        o = self._coerce(other)
        return FieldElement(self.ctx, self.ctx.s_mul(self.value, self.ctx.s_inv(o)))

    def __pow__(self, n: int):
        return FieldElement(self.ctx, self.ctx.s_pow(self.value, n))

    def inverse(self):
        return FieldElement(self.ctx, self.ctx.s_inv(self.value))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.ctx is other.ctx and self.value == other.value
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx.q, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value}@GF({self.ctx.q})"


@lru_cache(maxsize=None)
def make_field(p: int, k: int = 1) -> FieldCtx:
    return FieldCtx(p, k)


def field_of_order(q: int) -> FieldCtx:
    for p in range(2, q + 1):
        if q % p == 0:
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1:
                break
            return make_field(p, k)
    raise ValueError(f"{q} is not a prime power")


def sqrt_char2(x: FieldElement) -> FieldElement:
    return FieldElement(x.ctx, x.ctx.sqrt2(x.value))


def trace(x: FieldElement) -> FieldElement:
    return FieldElement(x.ctx, x.ctx.trace(x.value))
