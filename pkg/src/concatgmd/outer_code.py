"""Reed-Solomon outer codes with errors-and-erasures decoding.

Codewords are lists of field elements indexed by position ``i``; position ``i``
holds the coefficient of ``x^i`` in the code polynomial and has error locator
``g^i``.  Encoding is systematic: parity occupies positions ``0 .. n-k-1`` and
the message occupies positions ``n-k .. n-1``.  The generator polynomial has
roots ``g^1 .. g^(n-k)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from concatgmd.finite_field import GF2m, get_field


class CodeError(ValueError):
    """Bad code parameters or malformed decoder input."""


@dataclass(frozen=True)
class RSCode:
    gf: GF2m
    n: int
    k: int
    _gen: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.k < self.n <= self.gf.q - 1:
            raise CodeError(
                f"need 1 <= K_o < N_o <= q-1, got N_o={self.n}, K_o={self.k}, q={self.gf.q}"
            )
        g = [1]
        for i in range(1, self.n - self.k + 1):
            g = self.gf.poly_mul(g, [self.gf.exp(i), 1])
        object.__setattr__(self, "_gen", tuple(g))

    @classmethod
    def over(cls, w: int, n: int, k: int) -> "RSCode":
        return cls(get_field(w), n, k)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def d_min(self) -> int:
        return self.n - self.k + 1

    @property
    def n_parity(self) -> int:
        return self.n - self.k

    @property
    def generator_poly(self) -> tuple[int, ...]:
        return self._gen

    def message_of(self, codeword: Sequence[int]) -> list[int]:
        return list(codeword[self.n_parity:])

    def encode(self, message: Sequence[int]) -> list[int]:
        if len(message) != self.k:
            raise CodeError(f"message length {len(message)} != K_o={self.k}")
        gf = self.gf
        for s in message:
            gf.check(s)
        npar = self.n_parity
        # remainder of m(x) x^npar divided by the monic generator
        rem = [0] * npar
        gen = self._gen
        for coef in reversed(message):
            fb = coef ^ rem[npar - 1]
            rem = [0] + rem[:-1]
            if fb:
                for j in range(npar):
                    rem[j] ^= gf.mul(fb, gen[j])
        return rem + list(message)

    def syndromes(self, word: Sequence[int]) -> list[int]:
        return [self.gf.poly_eval(list(word), self.gf.exp(j)) for j in range(1, self.n_parity + 1)]

    def is_codeword(self, word: Sequence[int]) -> bool:
        return len(word) == self.n and not any(self.syndromes(word))

    def codewords(self) -> Iterable[list[int]]:
        """Enumerate every codeword in lexicographic message order (tiny codes only)."""
        for msg in itertools.product(range(self.gf.q), repeat=self.k):
            yield self.encode(msg)


def _check_erasures(code: RSCode, erasures: Iterable[int]) -> list[int]:
    er = sorted(set(int(e) for e in erasures))
    if er and (er[0] < 0 or er[-1] >= code.n):
        raise CodeError(f"erasure index out of range [0, {code.n})")
    return er


def rs_decode_ee(code: RSCode, received: Sequence[int], erasures: Iterable[int] = ()) -> list[int] | None:
    """Errors-and-erasures decoding.

    Returns the unique codeword within ``2t + |erasures| <= d_min - 1`` of the
    received word, or ``None`` when decoding fails.  Beyond that bound the
    result may be ``None`` or some other codeword.
    """
    gf = code.gf
    n, npar = code.n, code.n_parity
    if len(received) != n:
        raise CodeError(f"received length {len(received)} != N_o={n}")
    er = _check_erasures(code, erasures)
    rho = len(er)
    if rho > npar:
        return None

    r = list(received)
    for i in er:
        r[i] = 0
    for s in r:
        gf.check(s)
    synd = code.syndromes(r)
    if not any(synd):
        return r if rho == 0 else _verify(code, r)

    # erasure locator Gamma(x) = prod (1 - X_e x)
    lam = [1]
    for i in er:
        lam = gf.poly_mul(lam, [1, gf.exp(i)])
    b = list(lam)
    L = rho
    # Berlekamp-Massey seeded with the erasure locator
    for step in range(rho, npar):
        delta = 0
        for j, c in enumerate(lam):
            if step - j < 0:
                break
            if c:
                delta ^= gf.mul(c, synd[step - j])
        b = [0] + b
        if delta == 0:
            continue
        t = lam + [0] * (len(b) - len(lam))
        for j, c in enumerate(b):
            if c:
                t[j] ^= gf.mul(delta, c)
        if 2 * L <= step + rho:
            dinv = gf.inv(delta)
            b = [gf.mul(dinv, c) for c in lam]
            L = step + 1 + rho - L
        lam = t
    while len(lam) > 1 and lam[-1] == 0:
        lam.pop()
    deg = len(lam) - 1
    if deg != L or 2 * (L - rho) + rho > npar:
        return None

    # Chien search over valid positions only
    roots = [i for i in range(n) if gf.poly_eval(lam, gf.exp(-i)) == 0]
    if len(roots) != deg:
        return None

    # errata evaluator and Forney magnitudes (first consecutive root g^1)
    omega = gf.poly_mul(synd, lam)[:npar]
    dlam = [lam[j] if j % 2 == 1 else 0 for j in range(1, len(lam))]
    for i in roots:
        xinv = gf.exp(-i)
        den = gf.poly_eval(dlam, xinv)
        if den == 0:
            return None
        r[i] ^= gf.div(gf.poly_eval(omega, xinv), den)
    return _verify(code, r)


def _verify(code: RSCode, word: list[int]) -> list[int] | None:
    return word if not any(code.syndromes(word)) else None


BRUTE_FORCE_LIMIT = 1 << 20


def rs_brute_force_decode(code: RSCode, received: Sequence[int], erasures: Iterable[int] = ()) -> list[int]:
    """Nearest codeword on the non-erased positions; ties go to the lexicographically smallest."""
    if code.gf.q ** code.k > BRUTE_FORCE_LIMIT:
        raise CodeError("code too large for brute-force decoding")
    if len(received) != code.n:
        raise CodeError(f"received length {len(received)} != N_o={code.n}")
    er = set(_check_erasures(code, erasures))
    keep = [i for i in range(code.n) if i not in er]
    best, best_d = None, code.n + 1
    for cw in code.codewords():
        d = sum(1 for i in keep if cw[i] != received[i])
        if d < best_d or (d == best_d and cw < best):
            best, best_d = cw, d
    return best
