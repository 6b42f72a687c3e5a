"""Table-driven arithmetic over GF(2^w), 1 <= w <= 16.

Elements are plain ints in [0, 2^w); bit i of an element is the coefficient
of x^i in its polynomial-basis representation.
"""

from __future__ import annotations

from functools import lru_cache

# Primitive polynomials, bit-packed with the x^w term included.
DEFAULT_PRIMITIVE_POLYS = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


class FieldError(ValueError):
    """Invalid field construction or out-of-domain field operation."""


def build_tables(w: int, primitive_poly: int) -> tuple[list[int], list[int]]:
    """Return ``(log, antilog)`` tables for GF(2^w) generated by ``x``.

    ``antilog[i] = x^i`` for i in [0, q-2] and ``log[antilog[i]] = i``.
    ``log[0]`` is set to -1 as a sentinel.  Raises :class:`FieldError` when the
    polynomial does not have degree ``w`` or is not primitive.
    """
    if not 1 <= w <= 16:
        raise FieldError(f"extension degree must be in [1, 16], got {w}")
    if primitive_poly >> w != 1:
        raise FieldError(f"polynomial {primitive_poly:#x} does not have degree {w}")
    q = 1 << w
    antilog = [0] * (q - 1)
    log = [-1] * q
    x = 1
    for i in range(q - 1):
        if log[x] != -1:
            raise FieldError(f"polynomial {primitive_poly:#x} is not primitive for w={w}")
        antilog[i] = x
        log[x] = i
        x <<= 1
        if x & q:
            x ^= primitive_poly
    if x != 1:
        raise FieldError(f"polynomial {primitive_poly:#x} is not primitive for w={w}")
    return log, antilog


class GF2m:
    """The field GF(2^w) with log/antilog table multiplication."""

    def __init__(self, w: int, primitive_poly: int | None = None):
        if primitive_poly is None:
            if w not in DEFAULT_PRIMITIVE_POLYS:
                raise FieldError(f"extension degree must be in [1, 16], got {w}")
            primitive_poly = DEFAULT_PRIMITIVE_POLYS[w]
        self.w = w
        self.primitive_poly = primitive_poly
        self.q = 1 << w
        self.order = self.q - 1
        self.log, self.antilog = build_tables(w, primitive_poly)
        # doubled table so mul can skip the modulo
        self._exp = self.antilog + self.antilog

    def __repr__(self) -> str:
        return f"GF2m(w={self.w}, primitive_poly={self.primitive_poly:#x})"

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GF2m)
            and other.w == self.w
            and other.primitive_poly == self.primitive_poly
        )

    def __hash__(self) -> int:
        return hash((self.w, self.primitive_poly))

    @property
    def generator(self) -> int:
        return self.antilog[1] if self.order > 1 else 1

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"{a} is not an element of GF({self.q})")
        return a

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("zero has no multiplicative inverse")
        return self.antilog[(-self.log[a]) % self.order]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise FieldError("division by zero")
        if a == 0:
            return 0
        return self._exp[self.log[a] - self.log[b] + self.order]

    def pow(self, a: int, n: int) -> int:
        if n == 0:
            return 1
        if a == 0:
            if n < 0:
                raise FieldError("zero has no multiplicative inverse")
            return 0
        return self.antilog[(self.log[a] * n) % self.order]

    def exp(self, i: int) -> int:
        """Return ``g^i`` for the primitive element ``g``."""
        return self.antilog[i % self.order]

    # polynomials are lists of coefficients, index = degree

    def poly_eval(self, poly: list[int], x: int) -> int:
        y = 0
        for c in reversed(poly):
            y = self.mul(y, x) ^ c
        return y

    def poly_mul(self, p: list[int], r: list[int]) -> list[int]:
        out = [0] * (len(p) + len(r) - 1)
        for i, a in enumerate(p):
            if a == 0:
                continue
            la = self.log[a]
            for j, b in enumerate(r):
                if b:
                    out[i + j] ^= self._exp[la + self.log[b]]
        return out


@lru_cache(maxsize=None)
def get_field(w: int, primitive_poly: int | None = None) -> GF2m:
    return GF2m(w, primitive_poly)
