"""Arithmetic in GF(2^m) for m in {8, 16}.

Elements are plain integers in ``[0, q)``.  Addition is XOR; multiplication
goes through log/antilog tables built once per field.  The tables use a
sentinel log value for zero so that ``exp[log[a] + log[b]]`` is branch-free
and also valid for ``a == 0`` or ``b == 0``; the same trick is used by the
numba kernels in :mod:`rfcode._kernels`.
"""

from __future__ import annotations

import functools

import numpy as np

from .errors import ConfigInvalid, ZeroInverse

DEFAULT_POLYS = {8: 0x11D, 16: 0x1100B}


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit-polynomials."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a: int, mod: int) -> int:
    """Remainder of ``a`` modulo ``mod`` as polynomials over GF(2)."""
    deg = mod.bit_length() - 1
    while a.bit_length() - 1 >= deg:
        a ^= mod << (a.bit_length() - 1 - deg)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1 .. deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if poly_mod(poly, f) == 0:
                return False
    return True


class FieldSpec:
    """The field GF(2^m) defined by ``reduction_poly``.

    Instances are immutable after construction; use :func:`gf` to get a
    cached instance.
    """

    def __init__(self, m: int = 8, reduction_poly: int | None = None):
        if m not in DEFAULT_POLYS:
            raise ConfigInvalid(f"unsupported field width m={m}; expected 8 or 16")
        poly = DEFAULT_POLYS[m] if reduction_poly is None else int(reduction_poly)
        if poly.bit_length() - 1 != m:
            raise ConfigInvalid(f"reduction polynomial {poly:#x} does not have degree {m}")
        if not is_irreducible(poly):
            raise ConfigInvalid(f"reduction polynomial {poly:#x} is reducible")
        self.m = m
        self.reduction_poly = poly
        self.q = 1 << m
        self.order = self.q - 1
        self.dtype = np.uint8 if m == 8 else np.uint16
        self.generator = self._find_generator()
        self.exp, self.log = self._tables()
        inv = np.zeros(self.q, dtype=np.int64)
        inv[1:] = self.exp[(self.order - self.log[1:]) % self.order]
        self.inv_table = inv
        for arr in (self.exp, self.log, self.inv_table):
            arr.flags.writeable = False

    def _slow_mul(self, a: int, b: int) -> int:
        return poly_mod(clmul(a, b), self.reduction_poly)

    def _find_generator(self) -> int:
        # x is primitive for the default polynomials; otherwise scan
        for g in range(2, self.q):
            x, n = g, 1
            while x != 1:
                x = self._slow_mul(x, g)
                n += 1
            if n == self.order:
                return g
        raise ConfigInvalid("no primitive element found")  # unreachable for a field

    def _tables(self):
        n = self.order
        # exp[i] = g^(i mod n) for i < 2n, and 0 from 2n on; log[0] = 2n
        exp = np.zeros(4 * n + 1, dtype=np.int64)
        log = np.zeros(self.q, dtype=np.int64)
        x = 1
        for i in range(n):
            exp[i] = x
            log[x] = i
            x = self._slow_mul(x, self.generator)
        exp[n : 2 * n] = exp[:n]
        log[0] = 2 * n
        return exp, log

    # scalar arithmetic ---------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroInverse("zero has no multiplicative inverse")
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 1 if e == 0 else 0
        return int(self.exp[(int(self.log[a]) * e) % self.order])

    # vector arithmetic ---------------------------------------------------

    def mul_vec(self, a, b) -> np.ndarray:
        """Elementwise product of arrays (or an array and a scalar)."""
        a = np.asarray(a)
        b = np.asarray(b)
        return self.exp[self.log[a] + self.log[b]].astype(self.dtype)

    def dot(self, coeffs, vectors) -> np.ndarray:
        """Linear combination ``sum_i coeffs[i] * vectors[i]`` of equal-length rows."""
        vectors = np.asarray(vectors)
        out = np.zeros(vectors.shape[1:], dtype=self.dtype)
        for c, v in zip(coeffs, vectors):
            if c:
                out ^= self.mul_vec(int(c), v)
        return out

    def random(self, rng: np.random.Generator, size=None, nonzero=False):
        low = 1 if nonzero else 0
        return rng.integers(low, self.q, size=size).astype(self.dtype)

    # bytes <-> elements ----------------------------------------------------

    @property
    def element_bytes(self) -> int:
        return self.m // 8

    def from_bytes(self, data) -> np.ndarray:
        buf = np.frombuffer(bytes(data), dtype="<u2" if self.m == 16 else np.uint8)
        return buf.astype(self.dtype)

    def to_bytes(self, elements) -> bytes:
        arr = np.asarray(elements)
        return arr.astype("<u2" if self.m == 16 else np.uint8).tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and self.m == other.m
            and self.reduction_poly == other.reduction_poly
        )

    def __hash__(self):
        return hash((self.m, self.reduction_poly))

    def __repr__(self):
        return f"FieldSpec(m={self.m}, reduction_poly={self.reduction_poly:#x})"


@functools.lru_cache(maxsize=None)
def gf(m: int = 8, reduction_poly: int | None = None) -> FieldSpec:
    """Cached :class:`FieldSpec` constructor."""
    return FieldSpec(m, reduction_poly)


def add(field: FieldSpec, a: int, b: int) -> int:
    return field.add(a, b)


def mul(field: FieldSpec, a: int, b: int) -> int:
    return field.mul(a, b)


def inv(field: FieldSpec, a: int) -> int:
    return field.inv(a)
