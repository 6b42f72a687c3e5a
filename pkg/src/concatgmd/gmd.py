"""Generalized minimum distance decoding of the outer code.

Two trial schedules share one candidate-selection rule:

* :func:`revised_gmd` runs exactly ``1/eps2`` errors-and-erasures trials.
  Trial ``k`` erases every position that is among the ``D`` least reliable
  and whose weight is at most ``k * eps2``.
* :func:`forney_gmd` erases the ``j`` least reliable positions for
  ``j = 0 .. D``, i.e. ``D + 1`` trials.

Here ``D = floor(N_o (1 - r_o - eps1))``.  Every successful trial yields a
candidate; the candidate with the largest weighted correlation wins, and it is
accepted when its correlation exceeds ``N_o (r_o + eps1)``.

An outer decoder is any callable ``decoder(received, erasures)`` returning a
codeword (sequence of symbols) or ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

OuterDecoder = Callable[[Sequence[int], Sequence[int]], "Sequence[int] | None"]

_EPS = 1e-9


class GmdParamError(ValueError):
    pass


@dataclass(frozen=True)
class GmdParams:
    N_o: int
    r_o: float
    eps1: float = 0.0
    eps2: float = 0.25

    def __post_init__(self):
        if self.N_o < 1:
            raise GmdParamError("N_o must be positive")
        if not 0 < self.r_o < 1:
            raise GmdParamError(f"outer rate must lie in (0, 1), got {self.r_o}")
        if self.eps1 < 0 or self.r_o + self.eps1 >= 1:
            raise GmdParamError(f"need eps1 >= 0 and r_o + eps1 < 1, got eps1={self.eps1}")
        if not 0 < self.eps2 <= 1:
            raise GmdParamError(f"eps2 must lie in (0, 1], got {self.eps2}")
        inv = 1.0 / self.eps2
        if abs(inv - round(inv)) > _EPS:
            raise GmdParamError(f"1/eps2 must be an integer, got 1/{self.eps2} = {inv:g}")

    @classmethod
    def for_code(cls, code, eps1: float = 0.0, eps2: float = 0.25) -> "GmdParams":
        return cls(code.n, code.k / code.n, eps1, eps2)

    @property
    def n_patterns(self) -> int:
        return int(round(1.0 / self.eps2))

    @property
    def D(self) -> int:
        return max(0, math.floor(self.N_o * (1 - self.r_o - self.eps1) + _EPS))

    @property
    def threshold(self) -> float:
        return self.N_o * (self.r_o + self.eps1)

    @property
    def sufficient(self) -> float:
        e2 = self.eps2
        return self.N_o * (e2 / 2 + (self.r_o + self.eps1) * (1 - e2 / 2))

    def level(self, k: int) -> float:
        """Quantisation level ``k * eps2``, exact for reciprocal-integer eps2."""
        return float(Fraction(k, self.n_patterns))


@dataclass(frozen=True, eq=False)
class ReliabilityVector:
    alpha: np.ndarray
    order: np.ndarray = field(init=False)

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float)
        if a.ndim != 1:
            raise ValueError("reliability vector must be 1-D")
        if np.any(a < 0) or np.any(a > 1) or not np.all(np.isfinite(a)):
            raise ValueError("reliability weights must lie in [0, 1]")
        a.setflags(write=False)
        order = np.argsort(a, kind="stable")
        order.setflags(write=False)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class ErasurePattern:
    k: int
    erased: tuple[int, ...]


@dataclass(frozen=True)
class TrialOutcome:
    k: int
    n_erased: int
    candidate: tuple[int, ...] | None
    correlation: float | None


@dataclass(frozen=True)
class GmdDecision:
    codeword: tuple[int, ...] | None
    correlation: float
    accepted: bool
    trials_used: int
    per_trial_outcomes: tuple[TrialOutcome, ...] = ()


def agreement(estimate, candidate) -> np.ndarray:
    """``s_i``: +1 where the symbols agree, -1 where they differ."""
    est = np.asarray(estimate)
    cand = np.asarray(candidate)
    if est.shape != cand.shape:
        raise ValueError(f"length mismatch: {est.shape} vs {cand.shape}")
    return np.where(est == cand, 1.0, -1.0)


def weighted_correlation(rel: ReliabilityVector | np.ndarray, estimate, candidate) -> float:
    alpha = rel.alpha if isinstance(rel, ReliabilityVector) else np.asarray(rel, dtype=float)
    s = agreement(estimate, candidate)
    if s.shape != alpha.shape:
        raise ValueError(f"length mismatch: {alpha.shape} vs {s.shape}")
    return float(alpha @ s)


def build_patterns(rel: ReliabilityVector, params: GmdParams) -> list[ErasurePattern]:
    if len(rel) != params.N_o:
        raise ValueError(f"reliability length {len(rel)} != N_o={params.N_o}")
    window = rel.order[: params.D]
    wa = rel.alpha[window]
    return [
        ErasurePattern(k, tuple(sorted(int(i) for i in window[wa <= params.level(k)])))
        for k in range(params.n_patterns)
    ]


def forney_patterns(rel: ReliabilityVector, params: GmdParams) -> list[ErasurePattern]:
    return [
        ErasurePattern(j, tuple(sorted(int(i) for i in rel.order[:j])))
        for j in range(params.D + 1)
    ]


def _run_trials(rel, estimate, params, decoder, patterns) -> GmdDecision:
    estimate = [int(v) for v in estimate]
    if len(estimate) != params.N_o:
        raise ValueError(f"estimate length {len(estimate)} != N_o={params.N_o}")
    outcomes = []
    corr: dict[tuple[int, ...], float] = {}
    for pat in patterns:
        out = decoder(estimate, pat.erased)
        if out is None:
            outcomes.append(TrialOutcome(pat.k, len(pat.erased), None, None))
            continue
        cand = tuple(int(v) for v in out)
        if cand not in corr:
            corr[cand] = weighted_correlation(rel, estimate, cand)
        outcomes.append(TrialOutcome(pat.k, len(pat.erased), cand, corr[cand]))
    n = len(patterns)
    if not corr:
        return GmdDecision(None, -math.inf, False, n, tuple(outcomes))
    above = [c for c, v in corr.items() if v > params.threshold]
    if len(above) > 1:
        # impossible for an outer code whose minimum distance exceeds N_o(1 - r_o - eps1)
        raise RuntimeError("two candidates exceed the acceptance threshold")
    best = max(corr.values())
    winner = min(c for c, v in corr.items() if v == best)
    return GmdDecision(winner, best, best > params.threshold, n, tuple(outcomes))


def revised_gmd(rel: ReliabilityVector, estimate, params: GmdParams, outer_decoder: OuterDecoder) -> GmdDecision:
    """Constant-trial GMD: ``1/eps2`` outer decodings regardless of ``N_o``."""
    return _run_trials(rel, estimate, params, outer_decoder, build_patterns(rel, params))


def forney_gmd(rel: ReliabilityVector, estimate, params: GmdParams, outer_decoder: OuterDecoder) -> GmdDecision:
    """Classic GMD baseline with ``D + 1`` outer decodings."""
    return _run_trials(rel, estimate, params, outer_decoder, forney_patterns(rel, params))


def errors_only(rel: ReliabilityVector, estimate, params: GmdParams, outer_decoder: OuterDecoder) -> GmdDecision:
    """Single hard-decision decoding without erasures, scored like the GMD variants."""
    return _run_trials(rel, estimate, params, outer_decoder, [ErasurePattern(0, ())])


DECODERS = {
    "revised": revised_gmd,
    "forney": forney_gmd,
    "errors_only": errors_only,
}


def coverage_oracle(rel: ReliabilityVector, x_m, estimate, params: GmdParams) -> bool:
    """Brute-force check of the coverage property for one instance.

    True when the correlation of ``x_m`` is at most the sufficient level, or
    some quantised erasure mask leaves an unerased agreement count above the
    acceptance threshold.
    """
    s = agreement(estimate, x_m)
    if float(rel.alpha @ s) <= params.sufficient:
        return True
    for pat in build_patterns(rel, params):
        keep = np.ones(len(s), dtype=bool)
        keep[list(pat.erased)] = False
        if s[keep].sum() > params.threshold:
            return True
    return False
