"""Arithmetic in binary extension fields GF(2^m), 2 <= m <= 20.

Elements are integers in ``[0, 2^m)`` whose bit ``i`` is the coefficient of
``x^i``.  Every operation accepts Python ints or numpy arrays and broadcasts;
scalar inputs give back plain ints.

The field is reduced modulo a fixed primitive polynomial per degree (see
:data:`PRIMITIVE_POLYS`), so the element encoded ``2`` (the polynomial ``x``)
is always a primitive element.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, DivisionByZero, UnsupportedDegree

# One fixed primitive polynomial per degree; bit i is the coefficient of x^i.
PRIMITIVE_POLYS = {
    2: 0x7,          # x^2 + x + 1
    3: 0xB,          # x^3 + x + 1
    4: 0x13,         # x^4 + x + 1
    5: 0x25,         # x^5 + x^2 + 1
    6: 0x43,         # x^6 + x + 1
    7: 0x83,         # x^7 + x + 1
    8: 0x11D,        # x^8 + x^4 + x^3 + x^2 + 1
    9: 0x211,        # x^9 + x^4 + 1
    10: 0x409,       # x^10 + x^3 + 1
    11: 0x805,       # x^11 + x^2 + 1
    12: 0x1053,      # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,      # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,      # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,      # x^15 + x + 1
    16: 0x1100B,     # x^16 + x^12 + x^3 + x + 1
    17: 0x20009,     # x^17 + x^3 + 1
    18: 0x40081,     # x^18 + x^7 + 1
    19: 0x80027,     # x^19 + x^5 + x^2 + x + 1
    20: 0x100009,    # x^20 + x^3 + 1
}

MIN_DEGREE = 2
MAX_DEGREE = 20
# log/antilog tables up to this degree, carry-less multiply above it
TABLE_MAX_DEGREE = 16
# full q x q product table up to this degree
FULL_TABLE_MAX_DEGREE = 8


def _prime_factors(x):
    out, p = [], 2
    while p * p <= x:
        if x % p == 0:
            out.append(p)
            while x % p == 0:
                x //= p
        p += 1
    if x > 1:
        out.append(x)
    return out


class GF2m:
    """The field GF(2^m) with vectorised element and matrix arithmetic.

    Instances are immutable once built; use :func:`create_field` to get the
    shared instance for a degree.
    """

    characteristic = 2

    def __init__(self, m: int):
        if not isinstance(m, (int, np.integer)) or not MIN_DEGREE <= m <= MAX_DEGREE:
            raise UnsupportedDegree(f"extension degree must be in [{MIN_DEGREE}, {MAX_DEGREE}], got {m!r}")
        m = int(m)
        self.m = m
        self.q = 1 << m
        self.prim_poly = PRIMITIVE_POLYS[m]
        self.symbol_bytes = (m + 7) // 8
        if m <= 8:
            self.dtype = np.dtype(np.uint8)
        elif m <= 16:
            self.dtype = np.dtype(np.uint16)
        else:
            self.dtype = np.dtype(np.uint32)

        self._exp = self._log = self._mul_table = None
        if m <= TABLE_MAX_DEGREE:
            self._build_tables()
        if m <= FULL_TABLE_MAX_DEGREE:
            a = np.arange(self.q)
            self._mul_table = self._table_mul(a[:, None], a[None, :]).astype(self.dtype)

        if self.order(2) != self.q - 1:
            raise UnsupportedDegree(f"polynomial {self.prim_poly:#x} is not primitive")

    def __repr__(self):
        return f"GF2m(m={self.m}, prim_poly={self.prim_poly:#x})"

    def __eq__(self, other):
        return isinstance(other, GF2m) and other.m == self.m and other.prim_poly == self.prim_poly

    def __hash__(self):
        return hash((self.m, self.prim_poly))

    def _build_tables(self):
        q = self.q
        exp = np.zeros(2 * q, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & q:
                x ^= self.prim_poly
        exp[q - 1:2 * (q - 1)] = exp[:q - 1]
        self._exp, self._log = exp, log

    def _table_mul(self, a, b):
        r = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), 0, r)

    def _clmul(self, a, b):
        a = np.array(a, dtype=np.uint64)
        b = np.array(b, dtype=np.uint64)
        a, b = np.broadcast_arrays(a, b)
        a = a.copy()
        out = np.zeros(a.shape, dtype=np.uint64)
        top = np.uint64(self.q)
        poly = np.uint64(self.prim_poly)
        for bit in range(self.m):
            out ^= np.where((b >> np.uint64(bit)) & np.uint64(1), a, np.uint64(0))
            a <<= np.uint64(1)
            a = np.where(a & top, a ^ poly, a)
        return out

    # -- conversions -------------------------------------------------------

    def array(self, values) -> np.ndarray:
        """Coerce ``values`` to an element array, rejecting out-of-range entries."""
        arr = np.asarray(values)
        if arr.size and (arr.min() < 0 or arr.max() >= self.q):
            raise ValueError(f"values outside GF(2^{self.m})")
        return arr.astype(self.dtype)

    def from_integer(self, n: int) -> int:
        """The field element ``n * 1`` (an integer multiple of the unit)."""
        return int(n) & 1

    def _wrap(self, result, *inputs):
        if all(np.ndim(x) == 0 for x in inputs):
            return int(result)
        return np.asarray(result).astype(self.dtype, copy=False)

    # -- element arithmetic ------------------------------------------------

    def add(self, a, b):
        return self._wrap(np.bitwise_xor(a, b), a, b)

    def sub(self, a, b):
        # char 2: a - b == a + b
        return self.add(a, b)

    def neg(self, a):
        return self._wrap(np.asarray(a), a)

    def mul(self, a, b):
        a_ = np.asarray(a)
        b_ = np.asarray(b)
        if self._mul_table is not None:
            r = self._mul_table[a_.astype(np.intp), b_.astype(np.intp)]
        elif self._exp is not None:
            r = self._table_mul(a_.astype(np.int64), b_.astype(np.int64))
        else:
            r = self._clmul(a_, b_)
        return self._wrap(r, a, b)

    def inv(self, a):
        a_ = np.asarray(a)
        if np.any(a_ == 0):
            raise DivisionByZero("inverse of zero")
        if self._exp is not None:
            r = self._exp[(self.q - 1) - self._log[a_.astype(np.int64)]]
        else:
            r = self._pow_sq(a_, self.q - 2)
        return self._wrap(r, a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def _pow_sq(self, a, e):
        result = np.ones(np.shape(a), dtype=np.uint64)
        base = np.asarray(a, dtype=np.uint64)
        while e:
            if e & 1:
                result = self._clmul(result, base)
            base = self._clmul(base, base)
            e >>= 1
        return result

    def pow(self, a, e: int):
        """``a ** e`` for any integer ``e``; negative exponents invert first."""
        e = int(e)
        a_ = np.asarray(a)
        if e < 0:
            a_ = np.asarray(self.inv(a_))
            e = -e
        if e == 0:
            return self._wrap(np.ones_like(a_), a)
        if self._exp is not None:
            la = self._log[a_.astype(np.int64)]
            r = np.where(a_ == 0, 0, self._exp[(la * (e % (self.q - 1))) % (self.q - 1)])
        else:
            r = self._pow_sq(a_, e)
        return self._wrap(r, a)

    def order(self, a: int) -> int:
        """Multiplicative order of a nonzero scalar."""
        a = int(a)
        if a == 0:
            raise DivisionByZero("zero has no multiplicative order")
        n = self.q - 1
        order = n
        for p in _prime_factors(n):
            while order % p == 0 and self._scalar_pow(a, order // p) == 1:
                order //= p
        return order

    def _scalar_pow(self, a, e):
        # independent of the tables so it can validate them
        result, base = 1, a
        while e:
            if e & 1:
                result = _poly_mulmod(result, base, self.prim_poly, self.m)
            base = _poly_mulmod(base, base, self.prim_poly, self.m)
            e >>= 1
        return result

    @property
    def primitive_element(self) -> int:
        return 2

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=self.dtype)

    # -- matrices ----------------------------------------------------------

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product over the field.

        Splits both operands into their ``m`` bit planes so every plane
        product is an ordinary integer matmul, then recombines the
        ``2m - 1`` coefficient planes and reduces modulo the polynomial.
        """
        A = np.asarray(A)
        B = np.asarray(B)
        vec = B.ndim == 1
        if vec:
            B = B[:, None]
        if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
            raise DimensionMismatch(f"cannot multiply {A.shape} by {B.shape}")
        R, P = A.shape
        C = B.shape[1]
        acc = np.zeros((R, C), dtype=np.uint64)
        if P and R and C:
            m = self.m
            shifts = np.arange(m, dtype=np.uint32)[:, None, None]
            a_bits = ((A.astype(np.uint32)[None] >> shifts) & 1).astype(np.float32)
            b_bits = ((B.astype(np.uint32)[None] >> shifts) & 1).astype(np.float32)
            b_cat = b_bits.transpose(1, 0, 2).reshape(P, m * C)
            plane_shift = np.arange(m, dtype=np.uint64)[None, :, None]
            for i in range(m):
                if not a_bits[i].any():
                    continue
                t = (a_bits[i] @ b_cat).astype(np.int64) & 1
                t = t.reshape(R, m, C).astype(np.uint64) << plane_shift
                acc ^= np.bitwise_or.reduce(t, axis=1) << np.uint64(i)
            acc = self._reduce(acc)
        out = acc.astype(self.dtype)
        return out[:, 0] if vec else out

    def _reduce(self, u):
        m = self.m
        poly = np.uint64(self.prim_poly)
        one = np.uint64(1)
        for bit in range(2 * m - 2, m - 1, -1):
            u ^= ((u >> np.uint64(bit)) & one) * (poly << np.uint64(bit - m))
        return u

    def dot(self, a, b) -> int:
        return int(self.matmul(np.asarray(a)[None, :], np.asarray(b))[0])

    # -- serialization -----------------------------------------------------

    def to_bytes(self, symbols) -> bytes:
        """Unsigned little-endian encoding, ``symbol_bytes`` per element."""
        arr = np.asarray(symbols, dtype=np.uint32).reshape(-1)
        return arr.astype("<u4").view(np.uint8).reshape(-1, 4)[:, :self.symbol_bytes].tobytes()

    def from_bytes(self, data: bytes) -> np.ndarray:
        raw = np.frombuffer(data, dtype=np.uint8)
        if raw.size % self.symbol_bytes:
            raise ValueError("byte length is not a multiple of the symbol width")
        raw = raw.reshape(-1, self.symbol_bytes).astype(np.uint32)
        vals = np.zeros(raw.shape[0], dtype=np.uint32)
        for b in range(self.symbol_bytes):
            vals |= raw[:, b] << np.uint32(8 * b)
        return self.array(vals)


def _poly_mulmod(a, b, poly, m):
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return result


@lru_cache(maxsize=None)
def create_field(m: int) -> GF2m:
    """Shared field instance for degree ``m``."""
    return GF2m(m)


def primitive_element(field: GF2m) -> int:
    return field.primitive_element


def min_degree_for(size: int) -> int:
    """Smallest supported ``m`` with ``2^m >= size``."""
    m = MIN_DEGREE
    while (1 << m) < size:
        m += 1
    if m > MAX_DEGREE:
        raise UnsupportedDegree(f"no supported field has at least {size} elements")
    return m
