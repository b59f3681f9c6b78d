"""Arithmetic in GF(2^e), 1 <= e <= 16, backed by log/exp tables.

Elements are plain integers (or integer numpy arrays) whose bit ``i`` is the
coefficient of ``alpha^i``; ``alpha`` is the class of ``x`` modulo the fixed
primitive modulus of the field, so it generates the multiplicative group.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

# Fixed moduli; the remaining degrees use the smallest primitive polynomial.
_FIXED_MODULI = {
    1: 0b10,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
    10: 0b10000001001,
    12: 0b1000001010011,
}

MAX_DEGREE = 16


def _cycle_length(poly: int, e: int) -> int:
    """Multiplicative order of x modulo ``poly`` (0 if x is not invertible)."""
    top = 1 << e
    x, n = 2, 1
    while x != 1:
        x <<= 1
        if x & top:
            x ^= poly
        n += 1
        if n > top:
            return 0
    return n


def is_primitive(poly: int, e: int) -> bool:
    if poly >> e != 1 or not poly & 1:
        return False
    return _cycle_length(poly, e) == (1 << e) - 1


@lru_cache(maxsize=None)
def modulus_for(e: int) -> int:
    if not 1 <= e <= MAX_DEGREE:
        raise ValueError(f"extension degree must be in 1..{MAX_DEGREE}, got {e}")
    if e in _FIXED_MODULI:
        return _FIXED_MODULI[e]
    for poly in range((1 << e) + 1, 1 << (e + 1), 2):
        if is_primitive(poly, e):
            return poly
    raise AssertionError("no primitive polynomial found")  # pragma: no cover


@dataclass(frozen=True, eq=False)
class FieldCtx:
    """The field GF(2^e) with its modulus and multiplication tables.

    ``exp`` has length ``2*(q-1)`` so that ``exp[log[a] + log[b]]`` needs no
    reduction; ``log[0]`` is unused and set to 0.
    """

    e: int
    modulus: int
    exp: np.ndarray = field(repr=False)
    log: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return 1 << self.e

    @property
    def order(self) -> int:
        return (1 << self.e) - 1

    @property
    def dtype(self):
        return np.uint8 if self.e <= 8 else np.uint16

    def __eq__(self, other):
        return isinstance(other, FieldCtx) and other.e == self.e

    def __hash__(self):
        return hash(("GF2e", self.e))

    def __repr__(self):
        return f"FieldCtx(e={self.e}, modulus={self.modulus:#x})"

    # scalar arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF(2^e)")
        return int(self.exp[(self.order - self.log[a]) % self.order])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, k: int) -> int:
        if k == 0:
            return 1
        if a == 0:
            if k < 0:
                raise ZeroDivisionError("0 to a negative power")
            return 0
        return int(self.exp[(int(self.log[a]) * k) % self.order])

    def alpha_pow(self, k: int) -> int:
        return int(self.exp[k % self.order])

    # vectorised arithmetic ---------------------------------------------

    def asarray(self, a) -> np.ndarray:
        arr = np.asarray(a)
        if arr.size and (arr.min() < 0 or arr.max() >= self.q):
            raise ValueError(f"values out of range for GF(2^{self.e})")
        return arr.astype(self.dtype)

    def vmul(self, a, b) -> np.ndarray:
        a = np.asarray(a)
        b = np.asarray(b)
        la = self.log[a].astype(np.int64)
        lb = self.log[b].astype(np.int64)
        out = self.exp[la + lb]
        return np.where((a == 0) | (b == 0), 0, out).astype(self.dtype)

    def vinv(self, a) -> np.ndarray:
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of 0 in GF(2^e)")
        return self.exp[(self.order - self.log[a].astype(np.int64)) % self.order].astype(self.dtype)

    def vpow(self, a, k: int) -> np.ndarray:
        a = np.asarray(a)
        if k == 0:
            return np.ones_like(a, dtype=self.dtype)
        out = self.exp[(self.log[a].astype(np.int64) * k) % self.order]
        return np.where(a == 0, 0, out).astype(self.dtype)

    def dot(self, a, b) -> int:
        return int(np.bitwise_xor.reduce(self.vmul(a, b), initial=0))

    def random(self, rng: np.random.Generator, shape, nonzero: bool = False) -> np.ndarray:
        low = 1 if nonzero else 0
        return rng.integers(low, self.q, size=shape).astype(self.dtype)


@lru_cache(maxsize=None)
def ff_make(e: int) -> FieldCtx:
    modulus = modulus_for(e)
    q = 1 << e
    order = q - 1
    exp = np.zeros(2 * order, dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    if e == 1:
        exp[:] = 1
    else:
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & q:
                x ^= modulus
        exp[order:] = exp[:order]
    dtype = np.uint8 if e <= 8 else np.uint16
    exp = exp.astype(dtype)
    exp.flags.writeable = False
    log.flags.writeable = False
    return FieldCtx(e, modulus, exp, log)


def ff_add(ctx: FieldCtx, a: int, b: int) -> int:
    return ctx.add(a, b)


def ff_mul(ctx: FieldCtx, a: int, b: int) -> int:
    return ctx.mul(a, b)


def ff_inv(ctx: FieldCtx, a: int) -> int:
    return ctx.inv(a)


def ff_pow(ctx: FieldCtx, a: int, k: int) -> int:
    return ctx.pow(a, k)


class SubfieldEmbedding:
    """The embedding GF(2^e) -> GF(2^(2e)) and the relative trace back.

    The image of ``alpha`` is the smallest root (as an integer) of the base
    modulus inside the extension field.
    """

    def __init__(self, base: FieldCtx, ext: FieldCtx | None = None):
        if ext is None:
            ext = ff_make(2 * base.e)
        if ext.e != 2 * base.e:
            raise ValueError("extension must have twice the base degree")
        self.base = base
        self.ext = ext
        self.image_of_alpha = self._find_root()
        # image of each base element, and the inverse map on the image
        powers = [1]
        for _ in range(1, base.e):
            powers.append(ext.mul(powers[-1], self.image_of_alpha))
        table = np.zeros(base.q, dtype=np.int64)
        for a in range(base.q):
            v = 0
            for i in range(base.e):
                if a >> i & 1:
                    v ^= powers[i]
            table[a] = v
        self._embed = table.astype(ext.dtype)
        self._preimage = np.full(ext.q, -1, dtype=np.int64)
        self._preimage[table] = np.arange(base.q)

    def _find_root(self) -> int:
        ext, poly = self.ext, self.base.modulus
        if self.base.e == 1:
            return 1
        for z in range(2, ext.q):
            acc = 0
            zp = 1
            for i in range(self.base.e + 1):
                if poly >> i & 1:
                    acc ^= zp
                zp = ext.mul(zp, z)
            if acc == 0:
                return z
        raise AssertionError("base modulus has no root in the extension")  # pragma: no cover

    @property
    def image(self) -> np.ndarray:
        return self._embed

    def embed(self, a):
        if np.ndim(a) == 0:
            return int(self._embed[int(a)])
        return self._embed[np.asarray(a, dtype=np.int64)]

    def in_base(self, z) -> np.ndarray | bool:
        pre = self._preimage[np.asarray(z, dtype=np.int64)]
        return pre >= 0 if np.ndim(z) else bool(pre >= 0)

    def restrict(self, z):
        """Base-field preimage of an element known to lie in the subfield."""
        pre = self._preimage[np.asarray(z, dtype=np.int64)]
        if np.any(pre < 0):
            raise ValueError("element does not lie in the embedded subfield")
        if np.ndim(z) == 0:
            return int(pre)
        return pre.astype(self.base.dtype)

    def frobenius(self, z):
        """z -> z^q with q = 2^e (the generator of the relative Galois group)."""
        if np.ndim(z) == 0:
            return self.ext.pow(int(z), self.base.q)
        return self.ext.vpow(z, self.base.q)

    def trace_ext(self, z):
        """z + z^q computed inside the extension field."""
        if np.ndim(z) == 0:
            return int(z) ^ self.frobenius(z)
        return np.asarray(z).astype(self.ext.dtype) ^ self.frobenius(z)

    def trace(self, z):
        return self.restrict(self.trace_ext(z))


def ff_embed(emb: SubfieldEmbedding, a):
    return emb.embed(a)


def ff_trace(emb: SubfieldEmbedding, z):
    return emb.trace(z)


def field_header(ctx: FieldCtx) -> dict:
    return {"e": ctx.e, "modulus_hex": f"{ctx.modulus:#x}"}
