"""One-level and m-level (generalized) concatenated codes.

Inner symbol layout: the inner code carries ``K_i = k_1 + ... + k_m`` bits per
block, level 1 in the most significant bits.  With a linear inner code built
by :meth:`InnerCode.from_generator` this puts level ``j`` on generator rows
``k_1 + ... + k_{j-1}`` onwards, so the codewords that agree on levels
``1..j-1`` form a coset of the subcode spanned by the remaining rows.

Decoding is multistage.  Level ``j`` runs ML inner decoding restricted to the
coset fixed by the decisions of levels ``1..j-1``, then GMD-decodes its outer
code, and the decided outer codeword pins the coset for level ``j+1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from concatgmd.channel import ChannelModel
from concatgmd.gmd import DECODERS, GmdDecision, GmdParams, ReliabilityVector
from concatgmd.inner_code import InnerCode, decide, default_calibration, log_likelihoods
from concatgmd.outer_code import CodeError, RSCode, rs_decode_ee

MAX_LEVELS = 4


class SchemeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConcatScheme:
    inner: InnerCode
    level_bits: tuple[int, ...]
    outer: tuple[RSCode, ...]
    gmd: tuple[GmdParams, ...]
    T: float | None = None

    def __post_init__(self):
        m = len(self.level_bits)
        if not 1 <= m <= MAX_LEVELS:
            raise SchemeError(f"number of levels must be in [1, {MAX_LEVELS}], got {m}")
        if len(self.outer) != m or len(self.gmd) != m:
            raise SchemeError("need one outer code and one GMD parameter set per level")
        if any(k < 1 for k in self.level_bits):
            raise SchemeError("every level needs at least one bit")
        total = sum(self.level_bits)
        if self.inner.M != 1 << total:
            raise SchemeError(f"inner codebook size {self.inner.M} != 2^{total}")
        n = self.outer[0].n
        for j, (code, kj, p) in enumerate(zip(self.outer, self.level_bits, self.gmd), 1):
            if code.gf.w != kj:
                raise SchemeError(f"level {j}: outer field GF(2^{code.gf.w}) does not match k_{j}={kj}")
            if code.n != n:
                raise SchemeError(f"level {j}: outer length {code.n} != {n}")
            if p.N_o != n or abs(p.r_o - code.rate) > 1e-12:
                raise SchemeError(f"level {j}: GMD parameters do not match the outer code")
        if self.T is not None and self.T <= 0:
            raise SchemeError("calibration constant T must be positive")

    @classmethod
    def build(
        cls,
        inner: InnerCode,
        level_bits: Sequence[int],
        N_o: int,
        K_o: Sequence[int],
        eps1: float | Sequence[float] = 0.0,
        eps2: float | Sequence[float] = 0.25,
        T: float | None = None,
    ) -> "ConcatScheme":
        m = len(level_bits)
        eps1 = _per_level(eps1, m, "eps1")
        eps2 = _per_level(eps2, m, "eps2")
        if len(K_o) != m:
            raise SchemeError(f"need {m} outer dimensions, got {len(K_o)}")
        try:
            outer = tuple(RSCode.over(kj, N_o, kk) for kj, kk in zip(level_bits, K_o))
        except CodeError as exc:
            raise SchemeError(str(exc)) from None
        gmd = tuple(GmdParams.for_code(c, e1, e2) for c, e1, e2 in zip(outer, eps1, eps2))
        return cls(inner, tuple(level_bits), outer, gmd, T)

    @property
    def m(self) -> int:
        return len(self.level_bits)

    @property
    def N_o(self) -> int:
        return self.outer[0].n

    @property
    def N_i(self) -> int:
        return self.inner.length

    @property
    def length(self) -> int:
        return self.N_o * self.N_i

    @property
    def rate(self) -> float:
        """Overall rate in nats per channel use."""
        return sum(k * c.rate for k, c in zip(self.level_bits, self.outer)) * math.log(2) / self.N_i

    def shifts(self) -> list[int]:
        """Bit offset of each level's field inside the inner symbol."""
        return [sum(self.level_bits[j + 1:]) for j in range(self.m)]

    def calibration(self, ch: ChannelModel) -> float:
        return self.T if self.T is not None else default_calibration(ch, self.inner.min_distance)


def _per_level(v, m: int, name: str) -> list[float]:
    if isinstance(v, (int, float)):
        return [float(v)] * m
    v = [float(x) for x in v]
    if len(v) != m:
        raise SchemeError(f"{name}: need {m} values, got {len(v)}")
    return v


def inner_symbols(scheme: ConcatScheme, codewords: Sequence[Sequence[int]]) -> np.ndarray:
    sym = np.zeros(scheme.N_o, dtype=np.int64)
    for cw, kj in zip(codewords, scheme.level_bits):
        sym = (sym << kj) | np.asarray(cw, dtype=np.int64)
    return sym


def concat_encode(scheme: ConcatScheme, messages: Sequence[Sequence[int]]) -> np.ndarray:
    if len(messages) != scheme.m:
        raise SchemeError(f"need {scheme.m} messages, got {len(messages)}")
    codewords = [code.encode(msg) for code, msg in zip(scheme.outer, messages)]
    return scheme.inner.codebook[inner_symbols(scheme, codewords)].reshape(-1)


@dataclass(frozen=True)
class LevelResult:
    estimate: tuple[int, ...]
    reliability: ReliabilityVector
    decision: GmdDecision
    codeword: tuple[int, ...]
    # False once this level or any level above it produced no accepted codeword
    reliable: bool


@dataclass(frozen=True)
class ConcatResult:
    messages: list[list[int]]
    levels: list[LevelResult]

    @property
    def outer_invocations(self) -> int:
        return sum(lv.decision.trials_used for lv in self.levels)


def _blocks(scheme: ConcatScheme, received) -> np.ndarray:
    y = np.asarray(received, dtype=np.int64)
    if y.shape != (scheme.length,):
        raise SchemeError(f"received word length {y.size} != {scheme.length}")
    return y.reshape(scheme.N_o, scheme.N_i)


def concat_decode(
    scheme: ConcatScheme,
    ch: ChannelModel,
    received,
    variant: str = "revised",
) -> ConcatResult:
    gmd_decode = DECODERS[variant]
    T = scheme.calibration(ch)
    ll_all = log_likelihoods(scheme.inner.codebook, _blocks(scheme, received), ch)
    prefix = np.zeros(scheme.N_o, dtype=np.int64)
    remaining = sum(scheme.level_bits)
    levels: list[LevelResult] = []
    reliable = True
    for code, params, kj in zip(scheme.outer, scheme.gmd, scheme.level_bits):
        remaining -= kj
        width = 1 << (kj + remaining)
        cand = (prefix[:, None] * width) + np.arange(width)
        labels = cand >> remaining & ((1 << kj) - 1)
        ll = np.take_along_axis(ll_all, cand, axis=1)
        best, _, _, _, alpha = decide(ll, T, labels)
        est = np.take_along_axis(labels, best[:, None], axis=1)[:, 0]
        rel = ReliabilityVector(alpha)
        decision = gmd_decode(rel, est, params, lambda r, e, c=code: rs_decode_ee(c, r, e))
        reliable = reliable and decision.accepted
        cw = decision.codeword if decision.codeword is not None else tuple(int(v) for v in est)
        levels.append(LevelResult(tuple(int(v) for v in est), rel, decision, cw, reliable))
        prefix = (prefix << kj) | np.asarray(cw, dtype=np.int64)
    messages = [code.message_of(lv.codeword) for code, lv in zip(scheme.outer, levels)]
    return ConcatResult(messages, levels)


# one-level pipeline assembled directly from the inner code and GMD layer


def encode_one_level(outer: RSCode, inner: InnerCode, message: Sequence[int]) -> np.ndarray:
    cw = outer.encode(message)
    return np.concatenate([inner.encode(s) for s in cw])


def decode_one_level(
    outer: RSCode,
    inner: InnerCode,
    ch: ChannelModel,
    received,
    params: GmdParams,
    T: float | None = None,
    variant: str = "revised",
) -> tuple[list[int], GmdDecision, ReliabilityVector, list[int]]:
    """Returns ``(message, decision, reliability, estimate)``."""
    if T is None:
        T = default_calibration(ch, inner.min_distance)
    y = np.asarray(received, dtype=np.int64).reshape(outer.n, inner.length)
    best, _, _, _, alpha = decide(log_likelihoods(inner.codebook, y, ch), T)
    est = [int(v) for v in best]
    rel = ReliabilityVector(alpha)
    decision = DECODERS[variant](rel, est, params, lambda r, e: rs_decode_ee(outer, r, e))
    cw = decision.codeword if decision.codeword is not None else tuple(est)
    return outer.message_of(cw), decision, rel, est


def allocate_outer_rates(R: float, R_i: float, m: int, exponent) -> list[float]:
    """Per-level outer rates, in decoding order, that equalise level exponents.

    Decoding level ``j`` separates cosets inside a subcode of inner rate
    ``((m - j + 1)/m) R_i`` with exponent ``E_j = exponent(((m - j + 1)/m) R_i)``,
    so level 1 is the weakest.  Choosing ``1 - r_j = E / E_j`` with
    ``sum r_j = m R / R_i`` balances ``(1 - r_j) E_j`` across levels.
    """
    if not 0 < R < R_i:
        raise SchemeError("need 0 < R < R_i")
    e = np.array([exponent(i / m * R_i) for i in range(m, 0, -1)], dtype=float)
    if np.any(e <= 0):
        raise SchemeError("level exponent vanishes; inner rate at or above capacity")
    E = (m - m * R / R_i) / np.sum(1.0 / e)
    return [float(1 - E / ei) for ei in e]
