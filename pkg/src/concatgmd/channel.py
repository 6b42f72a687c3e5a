"""Discrete memoryless channels: models, presets, sampling and capacity.

All information quantities are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ROW_TOL = 1e-12


class ChannelError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Row-stochastic transition matrix ``matrix[x, y] = p(y|x)``."""

    matrix: np.ndarray
    name: str = "custom"
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise ChannelError("channel matrix must be a non-empty 2-D array")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ChannelError("channel probabilities must be finite and non-negative")
        sums = m.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise ChannelError(f"row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
        m.setflags(write=False)
        cdf = np.cumsum(m, axis=1)
        cdf[:, -1] = 1.0
        cdf.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    def log_matrix(self, floor: float = -700.0) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.maximum(np.log(self.matrix), floor)

    def sample(self, x: int, rng: np.random.Generator) -> int:
        """Draw one output for input ``x`` by inverse CDF on a single uniform."""
        if not 0 <= x < self.input_size:
            raise ChannelError(f"input symbol {x} outside [0, {self.input_size})")
        u = rng.random()
        return int(np.searchsorted(self._cdf[x], u, side="right"))

    def transmit(self, xs, rng: np.random.Generator) -> np.ndarray:
        """Vectorised :meth:`sample`; consumes one uniform per symbol, in order."""
        xs = np.asarray(xs, dtype=np.int64)
        if xs.size and (xs.min() < 0 or xs.max() >= self.input_size):
            raise ChannelError("input symbol outside the channel input alphabet")
        u = rng.random(xs.shape)
        cdf = self._cdf[xs]
        return (cdf <= u[..., None]).sum(axis=-1).astype(np.int64)

    def relabel(self, input_perm, output_perm) -> "ChannelModel":
        m = self.matrix[np.asarray(input_perm)][:, np.asarray(output_perm)]
        return ChannelModel(m, name=f"{self.name}[relabelled]")

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        """Symmetric in Gallager's sense: the outputs split into groups within
        which every row is a permutation of every other row and every column a
        permutation of every other column."""
        m = self.matrix
        groups: dict[tuple, list[int]] = {}
        for y in range(m.shape[1]):
            key = tuple(np.round(np.sort(m[:, y]), 10))
            groups.setdefault(key, []).append(y)
        for cols in groups.values():
            sub = np.sort(m[:, cols], axis=1)
            if np.any(np.abs(sub - sub[0]) > tol):
                return False
        return True


def mutual_information(ch: ChannelModel, p_x) -> float:
    p_x = np.asarray(p_x, dtype=float)
    w = ch.matrix
    q_y = p_x @ w
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(w > 0, w / np.where(q_y > 0, q_y, 1.0), 1.0)
        d = np.where(w > 0, w * np.log(ratio), 0.0).sum(axis=1)
    return float(max(p_x @ d, 0.0))


def validate_input_dist(p_x, size: int) -> np.ndarray:
    p = np.asarray(p_x, dtype=float)
    if p.shape != (size,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ChannelError(f"input distribution must be a length-{size} probability vector")
    return p


def capacity(ch: ChannelModel, tol: float = 1e-10, max_iter: int = 100_000) -> tuple[float, np.ndarray]:
    """Blahut-Arimoto capacity in nats and the optimising input distribution.

    Iterates until the standard upper bound ``max_x D(p(.|x) || q)`` and lower
    bound ``I(p; W)`` differ by less than ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = ch.matrix
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    pos = w > 0
    logw = np.log(np.where(pos, w, 1.0))
    for _ in range(max_iter):
        q = p @ w
        with np.errstate(divide="ignore"):
            logq = np.log(np.where(q > 0, q, 1.0))
        d = np.where(pos, w * (logw - logq), 0.0).sum(axis=1)
        lower = float(p @ d)
        upper = float(d.max())
        if upper - lower < tol:
            return max(lower, 0.0), p
        p = p * np.exp(d - upper)
        p /= p.sum()
    raise ConvergenceError(f"Blahut-Arimoto did not converge in {max_iter} iterations")


def preset_bsc(p: float) -> ChannelModel:
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"crossover probability {p} outside [0, 1]")
    return ChannelModel(np.array([[1 - p, p], [p, 1 - p]]), name=f"bsc:{p:g}")


def preset_qsc(q: int, p: float) -> ChannelModel:
    if q < 2:
        raise ChannelError("q-ary symmetric channel needs q >= 2")
    if not 0.0 <= p <= 1.0:
        raise ChannelError(f"symbol error probability {p} outside [0, 1]")
    m = np.full((q, q), p / (q - 1))
    np.fill_diagonal(m, 1 - p)
    return ChannelModel(m, name=f"qsc:{q}:{p:g}")


def preset_dec(q: int, e: float) -> ChannelModel:
    """q-ary erasure channel; output ``q`` is the erasure symbol."""
    if q < 2:
        raise ChannelError("erasure channel needs q >= 2")
    if not 0.0 <= e <= 1.0:
        raise ChannelError(f"erasure probability {e} outside [0, 1]")
    m = np.zeros((q, q + 1))
    np.fill_diagonal(m, 1 - e)
    m[:, q] = e
    return ChannelModel(m, name=f"dec:{q}:{e:g}")


def load_channel_file(path) -> ChannelModel:
    """Read the plain-text format: ``|X| |Y|`` then |X| rows of |Y| probabilities."""
    lines = [ln.split("#", 1)[0].split() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or len(lines[0]) != 2:
        raise ChannelError(f"{path}: first line must be '|X| |Y|'")
    nx, ny = (int(v) for v in lines[0])
    rows = lines[1:]
    if len(rows) != nx or any(len(r) != ny for r in rows):
        raise ChannelError(f"{path}: expected {nx} rows of {ny} probabilities")
    return ChannelModel(np.array([[float(v) for v in r] for r in rows]), name=Path(path).name)


def dump_channel_file(ch: ChannelModel, path) -> None:
    rows = [f"{ch.input_size} {ch.output_size}"]
    rows += [" ".join(repr(float(v)) for v in row) for row in ch.matrix]
    Path(path).write_text("\n".join(rows) + "\n")


def parse_channel(spec: str) -> ChannelModel:
    """Build a channel from ``bsc:p``, ``qsc:q:p``, ``dec:q:e`` or a file path."""
    parts = spec.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "bsc" and len(parts) == 2:
            return preset_bsc(float(parts[1]))
        if kind == "qsc" and len(parts) == 3:
            return preset_qsc(int(parts[1]), float(parts[2]))
        if kind == "dec" and len(parts) == 3:
            return preset_dec(int(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ChannelError(f"bad channel preset {spec!r}: {exc}") from None
    if kind in ("bsc", "qsc", "dec"):
        raise ChannelError(f"bad channel preset {spec!r}")
    if not Path(spec).is_file():
        raise ChannelError(f"unknown channel {spec!r} (not a preset and no such file)")
    return load_channel_file(spec)


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)
