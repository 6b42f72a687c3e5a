"""Short inner block codes with exhaustive ML decoding and reliability weights."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from concatgmd.channel import ChannelModel

LOG_FLOOR = -700.0
MAX_CODEBOOK = 4096
MAX_LENGTH = 32


class InnerCodeError(ValueError):
    pass


def symbol_bits(symbols, k: int) -> np.ndarray:
    """MSB-first bit expansion, shape ``(..., k)``."""
    symbols = np.asarray(symbols, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1)
    return (symbols[..., None] >> shifts) & 1


def gf2_rank(mat: np.ndarray) -> int:
    a = np.array(mat, dtype=np.uint8) & 1
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        pivot = np.flatnonzero(a[rank:, c])
        if pivot.size == 0:
            continue
        p = rank + pivot[0]
        a[[rank, p]] = a[[p, rank]]
        others = np.flatnonzero(a[:, c])
        others = others[others != rank]
        a[others] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True, eq=False)
class InnerCode:
    """Codebook of ``M`` distinct words of length ``N_i``; row ``s`` encodes symbol ``s``.

    ``generator`` is set for binary linear codes, where row ``s`` equals the
    MSB-first bits of ``s`` times the generator over GF(2).
    """

    codebook: np.ndarray
    generator: np.ndarray | None = None
    min_distance: int = field(init=False)

    def __post_init__(self):
        cb = np.array(self.codebook, dtype=np.int64)
        if cb.ndim != 2 or cb.shape[0] < 1:
            raise InnerCodeError("codebook must be a non-empty 2-D array")
        if cb.shape[0] > MAX_CODEBOOK or cb.shape[1] > MAX_LENGTH:
            raise InnerCodeError(f"codebook limited to M <= {MAX_CODEBOOK}, N_i <= {MAX_LENGTH}")
        if np.any(cb < 0):
            raise InnerCodeError("codeword symbols must be non-negative")
        if len(np.unique(cb, axis=0)) != cb.shape[0]:
            raise InnerCodeError("codebook rows must be distinct")
        cb.setflags(write=False)
        object.__setattr__(self, "codebook", cb)
        if self.generator is not None:
            g = np.array(self.generator, dtype=np.int64)
            g.setflags(write=False)
            object.__setattr__(self, "generator", g)
        object.__setattr__(self, "min_distance", _min_distance(cb))

    @classmethod
    def from_generator(cls, generator) -> "InnerCode":
        g = np.asarray(generator, dtype=np.int64) & 1
        k = g.shape[0]
        if gf2_rank(g) != k:
            raise InnerCodeError("generator matrix is not full rank")
        cb = (symbol_bits(np.arange(1 << k), k) @ g) % 2
        return cls(cb, generator=g)

    @property
    def M(self) -> int:
        return self.codebook.shape[0]

    @property
    def length(self) -> int:
        return self.codebook.shape[1]

    @property
    def k_bits(self) -> int:
        return int(self.M).bit_length() - 1

    @property
    def rate(self) -> float:
        """Nats per channel use."""
        return float(np.log(self.M) / self.length)

    def encode(self, symbol: int) -> np.ndarray:
        if not 0 <= symbol < self.M:
            raise InnerCodeError(f"symbol {symbol} outside [0, {self.M})")
        return self.codebook[symbol]

    def dump(self, path) -> None:
        lines = ["".join(np.base_repr(int(v), 36) for v in row) for row in self.codebook]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "InnerCode":
        rows = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
        return cls(np.array([[int(c, 36) for c in row] for row in rows]))


def _min_distance(cb: np.ndarray) -> int:
    if cb.shape[0] < 2:
        return cb.shape[1]
    best = cb.shape[1]
    for i in range(cb.shape[0] - 1):
        d = (cb[i + 1:] != cb[i]).sum(axis=1).min()
        best = min(best, int(d))
    return best


def random_linear_codebook(
    seed: int,
    n: int,
    k_bits: int,
    attempts: int = 1,
    generator=None,
    max_retries: int = 1000,
) -> InnerCode:
    """Best of ``attempts`` uniformly drawn full-rank binary ``[n, k_bits]`` codes.

    "Best" is largest minimum distance, first draw winning ties.  A fixed
    ``generator`` bypasses the draw.
    """
    if generator is not None:
        return InnerCode.from_generator(generator)
    if not 1 <= k_bits <= 12 or k_bits > n:
        raise InnerCodeError(f"need 1 <= k_bits <= min(12, N_i), got k_bits={k_bits}, N_i={n}")
    if attempts < 1:
        raise InnerCodeError("attempts must be >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(attempts):
        for _ in range(max_retries):
            g = rng.integers(0, 2, size=(k_bits, n))
            if gf2_rank(g) == k_bits:
                break
        else:
            raise InnerCodeError("could not draw a full-rank generator")
        code = InnerCode.from_generator(g)
        if best is None or code.min_distance > best.min_distance:
            best = code
    return best


def repetition_code(n: int) -> InnerCode:
    return InnerCode.from_generator(np.ones((1, n), dtype=np.int64))


def default_calibration(ch: ChannelModel, d: int) -> float:
    """Reliability scale ``T``: ``d`` times the median finite log-likelihood gap.

    The median runs over all ``(x, x', y)`` with ``x != x'`` and both
    ``p(y|x)``, ``p(y|x')`` positive.  Falls back to ``d`` when that set is
    empty or its median is zero (noiseless or useless channels).  Passing the
    inner minimum distance makes an error-free block of a symmetric channel
    score ``alpha = 1``.
    """
    w = ch.matrix
    gaps = []
    for x in range(w.shape[0]):
        for x2 in range(w.shape[0]):
            if x == x2:
                continue
            ok = (w[x] > 0) & (w[x2] > 0)
            gaps.extend(np.abs(np.log(w[x, ok]) - np.log(w[x2, ok])))
    med = float(np.median(gaps)) if gaps else 0.0
    return d * (med if med > 0 else 1.0)


@dataclass(frozen=True)
class InnerDecision:
    best: int
    second: int
    L1: float
    L2: float
    alpha: float


def log_likelihoods(codebook: np.ndarray, y, ch: ChannelModel) -> np.ndarray:
    """Per-codeword log-likelihoods; ``y`` may carry leading batch axes."""
    logp = ch.log_matrix(LOG_FLOOR)
    y = np.asarray(y, dtype=np.int64)
    if y.shape[-1] != codebook.shape[1]:
        raise InnerCodeError(f"received block length {y.shape[-1]} != N_i={codebook.shape[1]}")
    if y.size and (y.min() < 0 or y.max() >= ch.output_size):
        raise InnerCodeError("received symbol outside the channel output alphabet")
    if codebook.max() >= ch.input_size:
        raise InnerCodeError("codebook uses symbols outside the channel input alphabet")
    # logp[c_mj, y_j] summed over j
    return logp[codebook, y[..., None, :]].sum(axis=-1)


def decide(ll: np.ndarray, T: float, labels: np.ndarray | None = None):
    """Best/second decisions from a ``(..., M)`` log-likelihood array.

    With ``labels``, "second" is the best codeword whose label differs from the
    winner's, so the gap measures confidence in the winner's label.  Returns
    arrays ``best, second, L1, L2, alpha``.
    """
    if T <= 0:
        raise InnerCodeError("calibration constant T must be positive")
    best = np.argmax(ll, axis=-1)
    L1 = np.take_along_axis(ll, best[..., None], axis=-1)[..., 0]
    if ll.shape[-1] < 2:
        second = best.copy()
        L2 = np.full_like(L1, -np.inf)
    else:
        masked = ll.astype(float, copy=True)
        if labels is None:
            np.put_along_axis(masked, best[..., None], -np.inf, axis=-1)
        else:
            labels = np.broadcast_to(labels, ll.shape)
            win = np.take_along_axis(labels, best[..., None], axis=-1)
            masked[labels == win] = -np.inf
        second = np.argmax(masked, axis=-1)
        L2 = np.take_along_axis(masked, second[..., None], axis=-1)[..., 0]
    with np.errstate(invalid="ignore"):
        alpha = np.clip((L1 - L2) / T, 0.0, 1.0)
    alpha = np.where(np.isfinite(L2), alpha, 1.0)
    return best, second, L1, L2, alpha


def ml_decode(code: InnerCode, y, ch: ChannelModel, T: float | None = None) -> InnerDecision:
    """Exhaustive ML decision on one received block with reliability weight."""
    if T is None:
        T = default_calibration(ch, code.min_distance)
    ll = log_likelihoods(code.codebook, y, ch)
    best, second, L1, L2, alpha = decide(ll, T)
    return InnerDecision(int(best), int(second), float(L1), float(L2), float(alpha))
