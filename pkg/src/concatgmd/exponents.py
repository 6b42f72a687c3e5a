"""Error exponents of discrete memoryless channels.

Implements Gallager's exponent ``E(R) = max_p E_L(R, p)`` with its three-branch
``E_L`` (expurgated, straight line, random coding), Forney's one-level
concatenation exponent ``E_c``, the m-level exponent ``E^(m)`` and its
``m -> inf`` limit ``E^(inf)`` (Blokh-Zyablov).  Everything is in nats.

All optimisers are deterministic: fixed grids refined by golden-section
search.  Internally every routine is vectorised over batches of rates and
input distributions; the public scalar API validates domains and wraps them.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from concatgmd.channel import ChannelModel, capacity, mutual_information, validate_input_dist

RHO_MAX = 50.0
RHO_TOL = 1e-9
FD_STEP = 1e-5
R_GRID = 512
R_TOL = 1e-9
DIVERGENCE_FLOOR = 1e-12
INTEGRAL_RTOL = 1e-7
MAX_GENERAL_INPUTS = 6

_INVPHI = (math.sqrt(5) - 1) / 2


class ExponentDomainError(ValueError):
    pass


class RhoCapWarning(RuntimeWarning):
    pass


def golden_max(f, lo, hi, tol: float):
    """Vectorised golden-section maximisation of a unimodal ``f`` on ``[lo, hi]``.

    ``f`` maps an array of abscissae to an array of values of the same shape.
    Returns ``(x, f(x))``; the endpoints are checked too, so a maximum on the
    boundary is found exactly.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    width = float(np.max(hi - lo)) if lo.size else 0.0
    iters = max(0, math.ceil(math.log(tol / width) / math.log(_INVPHI))) if width > tol else 0
    a, b = lo.copy(), hi.copy()
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        # keep [a, d] where the left probe wins, else [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - _INVPHI * (b - a), d)
        nd = np.where(left, c, a + _INVPHI * (b - a))
        probe = np.where(left, nc, nd)
        fp = f(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = nc, nd
    x = np.where(fc >= fd, c, d)
    fx = np.maximum(fc, fd)
    flo, fhi = f(lo), f(hi)
    x = np.where(flo > fx, lo, x)
    fx = np.maximum(fx, flo)
    x = np.where(fhi > fx, hi, x)
    fx = np.maximum(fx, fhi)
    return x, fx


def simplex_grid(nx: int, resolution: int) -> np.ndarray:
    """All distributions on ``nx`` points with coordinates in multiples of ``1/resolution``."""
    pts = [
        c
        for c in itertools.product(range(resolution + 1), repeat=nx - 1)
        if sum(c) <= resolution
    ]
    arr = np.array([list(c) + [resolution - sum(c)] for c in pts], dtype=float)
    return arr / resolution


def _grid_resolution(nx: int) -> int:
    return 64 if nx <= 3 else (16 if nx == 4 else 8)


def simplex_maximize(fn, nx: int, min_step: float = 1e-7):
    """Maximise ``fn`` (batch of distributions ``(n, nx)`` -> ``(n,)``) over the simplex.

    Grid search followed by coordinate ascent that moves mass between pairs of
    coordinates, halving the step until ``min_step``.
    """
    res = _grid_resolution(nx)
    grid = simplex_grid(nx, res)
    vals = fn(grid)
    i = int(np.argmax(vals))
    p, best = grid[i].copy(), float(vals[i])
    pairs = [(a, b) for a in range(nx) for b in range(nx) if a != b]
    step = 1.0 / res
    while step >= min_step:
        moves = []
        for a, b in pairs:
            if p[a] >= step:
                q = p.copy()
                q[a] -= step
                q[b] += step
                moves.append(q)
        if moves:
            moves = np.array(moves)
            mv = fn(moves)
            j = int(np.argmax(mv))
            if mv[j] > best + 1e-15:
                p, best = moves[j], float(mv[j])
                continue
        step /= 2
    return p, best


@dataclass
class ExponentPoint:
    R: float
    E: float
    rho: float | None = None
    r_o: float | None = None
    p_X: np.ndarray | None = None


@dataclass
class ExponentCurve:
    variant: str
    channel_id: str
    points: list[ExponentPoint] = field(default_factory=list)

    @property
    def rates(self) -> np.ndarray:
        return np.array([pt.R for pt in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([pt.E for pt in self.points])


class ExponentCalculator:
    """Exponent computations for one channel; caches capacity and symmetry."""

    def __init__(self, ch: ChannelModel, rho_max: float = RHO_MAX, rho_tol: float = RHO_TOL):
        self.ch = ch
        self.W = ch.matrix
        self.nx = ch.input_size
        self.rho_max = rho_max
        self.rho_tol = rho_tol
        self.symmetric = ch.is_symmetric()
        self.uniform = np.full(self.nx, 1.0 / self.nx)
        if self.symmetric:
            self.C = mutual_information(ch, self.uniform)
            self.p_cap = self.uniform
        else:
            self.C, self.p_cap = capacity(ch, tol=1e-13)
        sq = np.sqrt(self.W)
        self.bhatt = np.clip(sq @ sq.T, 0.0, 1.0)

    # vectorised primitives: rho has shape (n,), P has shape (n, nx) or (nx,)

    def _P(self, P, n):
        P = np.asarray(P, dtype=float)
        return np.broadcast_to(P, (n, self.nx)) if P.ndim == 1 else P

    def e0(self, rho, P) -> np.ndarray:
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        P = self._P(P, rho.size)
        s = 1.0 / (1.0 + rho)
        with np.errstate(divide="ignore"):
            wp = self.W[None] ** s[:, None, None]
        inner = np.einsum("nx,nxy->ny", P, wp)
        tot = (inner ** (1.0 + rho)[:, None]).sum(axis=1)
        return -np.log(tot)

    def ex(self, rho, P) -> np.ndarray:
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        P = self._P(P, rho.size)
        with np.errstate(divide="ignore"):
            bp = self.bhatt[None] ** (1.0 / rho)[:, None, None]
        tot = np.einsum("nx,nxz,nz->n", P, bp, P)
        return -rho * np.log(tot)

    def critical_rate_batch(self, P, n) -> np.ndarray:
        h = FD_STEP
        return (self.e0(np.full(n, 1 + h), P) - self.e0(np.full(n, 1 - h), P)) / (2 * h)

    def expurgation_rate_batch(self, P, n) -> np.ndarray:
        h = FD_STEP
        return (self.ex(np.full(n, 1 + h), P) - self.ex(np.full(n, 1 - h), P)) / (2 * h)

    def mutual_info_batch(self, P) -> np.ndarray:
        P = np.atleast_2d(P)
        q = P @ self.W
        w = self.W
        with np.errstate(divide="ignore", invalid="ignore"):
            logratio = np.where(w[None] > 0, np.log(w[None] / np.where(q[:, None, :] > 0, q[:, None, :], 1.0)), 0.0)
        return np.maximum(np.einsum("nx,xy,nxy->n", P, w, logratio), 0.0)

    def el_batch(self, R, P, warn: bool = True):
        """``E_L`` for arrays of rates and distributions, with the maximising rho.

        Rates at or above ``I(p)`` give 0 (the random-coding branch peaks at
        rho = 0 there).
        """
        R = np.atleast_1d(np.asarray(R, dtype=float))
        n = R.size
        P = self._P(P, n)
        Rx = self.expurgation_rate_batch(P, n)
        Rc = self.critical_rate_batch(P, n)
        E = np.empty(n)
        rho = np.empty(n)

        low = R < Rx
        if low.any():
            Rl, Pl = R[low], P[low]
            x, v = golden_max(
                lambda r: self.ex(r, Pl) - r * Rl,
                np.ones(Rl.size), np.full(Rl.size, self.rho_max), self.rho_tol,
            )
            E[low], rho[low] = v, x
            if warn and np.any(x >= self.rho_max - 1e-6):
                warnings.warn(
                    f"expurgated exponent maximiser hit rho_max={self.rho_max}", RhoCapWarning, stacklevel=3
                )
        mid = ~low & (R <= Rc)
        if mid.any():
            E[mid] = self.e0(np.ones(int(mid.sum())), P[mid]) - R[mid]
            rho[mid] = 1.0
        high = ~low & ~mid
        if high.any():
            Rh, Ph = R[high], P[high]
            x, v = golden_max(
                lambda r: self.e0(r, Ph) - r * Rh,
                np.zeros(Rh.size), np.ones(Rh.size), self.rho_tol,
            )
            E[high], rho[high] = v, x
        return np.maximum(E, 0.0), rho

    # scalar API

    def E0(self, rho: float, p_X=None) -> float:
        if rho < 0:
            raise ExponentDomainError("rho must be >= 0")
        if rho == 0:
            return 0.0
        return float(self.e0([rho], self._dist(p_X))[0])

    def Ex(self, rho: float, p_X=None) -> float:
        if rho < 1:
            raise ExponentDomainError("rho must be >= 1")
        return float(self.ex([rho], self._dist(p_X))[0])

    def critical_rate(self, p_X=None) -> float:
        return float(self.critical_rate_batch(self._dist(p_X), 1)[0])

    def expurgation_rate(self, p_X=None) -> float:
        return float(self.expurgation_rate_batch(self._dist(p_X), 1)[0])

    def _dist(self, p_X):
        if p_X is None:
            return self.uniform
        return validate_input_dist(p_X, self.nx)

    def _check_rate(self, R: float, cap: float):
        if not 0 < R < cap:
            raise ExponentDomainError(f"rate {R} outside (0, C={cap})")

    def E_L(self, R: float, p_X=None) -> ExponentPoint:
        p = self._dist(p_X)
        self._check_rate(R, mutual_information(self.ch, p))
        E, rho = self.el_batch([R], p)
        return ExponentPoint(R, float(E[0]), rho=float(rho[0]), p_X=p)

    def _E_given_rate(self, R: float, refine: bool = True):
        """``max_p E_L(R, p)`` without domain checks; returns ``(E, p, rho)``."""
        if self.symmetric:
            E, rho = self.el_batch([R], self.uniform, warn=refine)
            return float(E[0]), self.uniform, float(rho[0])
        if self.nx > MAX_GENERAL_INPUTS:
            raise ExponentDomainError(f"general optimiser limited to |X| <= {MAX_GENERAL_INPUTS}")

        def fn(P):
            return self.el_batch(np.full(len(P), R), P, warn=False)[0]

        if refine:
            p, _ = simplex_maximize(fn, self.nx)
        else:
            grid = simplex_grid(self.nx, _grid_resolution(self.nx))
            p = grid[int(np.argmax(fn(grid)))]
        E, rho = self.el_batch([R], p, warn=refine)
        return float(E[0]), p, float(rho[0])

    def E(self, R: float) -> ExponentPoint:
        self._check_rate(R, self.C)
        E, p, rho = self._E_given_rate(R)
        return ExponentPoint(R, E, rho=rho, p_X=p)

    def _E_batch_grid(self, U) -> np.ndarray:
        """``E(u)`` on an array of rates (grid-only optimisation over p)."""
        U = np.asarray(U, dtype=float)
        if self.symmetric:
            return self.el_batch(U, self.uniform, warn=False)[0]
        if self.nx > MAX_GENERAL_INPUTS:
            raise ExponentDomainError(f"general optimiser limited to |X| <= {MAX_GENERAL_INPUTS}")
        grid = simplex_grid(self.nx, _grid_resolution(self.nx))
        best = np.zeros(U.size)
        for p in grid:
            best = np.maximum(best, self.el_batch(U, p, warn=False)[0])
        return best

    def _rate_grid(self, R: float) -> np.ndarray:
        lo = R / self.C
        return lo + (1.0 - lo) * np.arange(R_GRID) / (R_GRID - 1)

    def _refine_outer_rate(self, R, r, vals, objective):
        """Golden-section refinement of a grid maximum over the outer rate."""
        j = int(np.argmax(vals))
        a, b = r[max(j - 1, 0)], r[min(j + 1, len(r) - 1)]
        x, v = golden_max(lambda t: np.array([objective(float(ti)) for ti in np.atleast_1d(t)]), [a], [b], R_TOL)
        if v[0] >= vals[j]:
            return float(x[0]), float(v[0])
        return float(r[j]), float(vals[j])

    def Ec(self, R: float) -> ExponentPoint:
        """Forney's exponent ``max_{r_o in [R/C, 1]} (1 - r_o) E(R / r_o)``."""
        self._check_rate(R, self.C)
        r = self._rate_grid(R)
        vals = (1.0 - r) * self._E_batch_grid(np.minimum(R / r, self.C))

        def objective(t):
            return (1.0 - t) * self._E_given_rate(min(R / t, self.C))[0]

        r_star, E = self._refine_outer_rate(R, r, vals, objective)
        _, p, rho = self._E_given_rate(min(R / r_star, self.C))
        return ExponentPoint(R, max(E, 0.0), rho=rho, r_o=r_star, p_X=p)

    # m-level and Blokh-Zyablov

    def _em_objective(self, R, r, m, p) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        u = R / r
        frac = np.arange(1, m + 1) / m
        x = (u[:, None] * frac[None, :]).ravel()
        E = self.el_batch(x, p, warn=False)[0].reshape(r.size, m)
        with np.errstate(divide="ignore"):
            inv_sum = (1.0 / E).sum(axis=1)
        out = (1.0 - r) * m / inv_sum
        out[np.any(E < DIVERGENCE_FLOOR, axis=1)] = 0.0
        return out

    def _em_for_p(self, R, m, p, refine=True):
        r = self._rate_grid(R)
        vals = self._em_objective(R, r, m, p)
        if not refine:
            j = int(np.argmax(vals))
            return float(vals[j]), float(r[j])
        r_star, E = self._refine_outer_rate(R, r, vals, lambda t: float(self._em_objective(R, t, m, p)[0]))
        return E, r_star

    def Em(self, R: float, m: int) -> ExponentPoint:
        """m-level concatenation exponent."""
        if m < 1:
            raise ExponentDomainError("m must be >= 1")
        self._check_rate(R, self.C)
        p = self._optimize_p(lambda q, refine: self._em_for_p(R, m, q, refine)[0])
        E, r_star = self._em_for_p(R, m, p)
        return ExponentPoint(R, max(E, 0.0), r_o=r_star, p_X=p)

    def _inv_el(self, x, p) -> np.ndarray:
        E = self.el_batch(x, p, warn=False)[0]
        with np.errstate(divide="ignore"):
            return np.where(E < DIVERGENCE_FLOOR, np.inf, 1.0 / np.maximum(E, DIVERGENCE_FLOOR))

    def integrate_inv_el(self, a, b, p, rtol: float = INTEGRAL_RTOL, max_depth: int = 50) -> np.ndarray:
        """``int_a^b dx / E_L(x, p)`` for arrays of intervals by adaptive Simpson.

        All active subintervals are refined together so each round costs one
        batched ``E_L`` evaluation.  Intervals touching ``E_L < 1e-12`` return inf.
        """
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        n = a.size
        result = np.zeros(n)
        m = (a + b) / 2
        f = self._inv_el(np.concatenate([a, m, b]), p)
        fa, fm, fb = f[:n], f[n:2 * n], f[2 * n:]
        whole = (b - a) / 6 * (fa + 4 * fm + fb)
        owner = np.arange(n)
        depth = np.zeros(n, dtype=int)
        while owner.size:
            lm, rm = (a + m) / 2, (m + b) / 2
            k = a.size
            g = self._inv_el(np.concatenate([lm, rm]), p)
            flm, frm = g[:k], g[k:]
            left = (m - a) / 6 * (fa + 4 * flm + fm)
            right = (b - m) / 6 * (fm + 4 * frm + fb)
            both = left + right
            with np.errstate(invalid="ignore"):
                err = np.abs(both - whole)
            finite = np.isfinite(both)
            done = ~finite | (err <= 15 * rtol * np.abs(both)) | (depth >= max_depth)
            est = np.where(finite, both + (both - whole) / 15, np.inf)
            np.add.at(result, owner[done], est[done])
            keep = ~done
            a, m, b = a[keep], m[keep], b[keep]
            fa, fm, fb, flm, frm = fa[keep], fm[keep], fb[keep], flm[keep], frm[keep]
            left, right = left[keep], right[keep]
            lm, rm = lm[keep], rm[keep]
            owner, depth = owner[keep], depth[keep] + 1
            # children: [a, m] with midpoint lm, and [m, b] with midpoint rm
            a, m, b = np.concatenate([a, m]), np.concatenate([lm, rm]), np.concatenate([m, b])
            fa, fm, fb = np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb])
            whole = np.concatenate([left, right])
            owner = np.concatenate([owner, owner])
            depth = np.concatenate([depth, depth])
        return result

    def _einf_for_p(self, R, p, refine=True):
        r = self._rate_grid(R)[1:-1]
        u = R / r  # decreasing in r
        order = np.argsort(u)
        us = u[order]
        a0 = 1e-6 * us[0]
        head = a0 * self._inv_el([a0], p)[0]
        pieces = self.integrate_inv_el(np.concatenate([[a0], us[:-1]]), us, p)
        F_sorted = head + np.cumsum(pieces)
        F = np.empty_like(F_sorted)
        F[order] = F_sorted
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(np.isfinite(F) & (F > 0), (u - R) / F, 0.0)
        j = int(np.argmax(vals))
        if not refine or vals[j] <= 0:
            return float(vals[j]), float(r[j])
        # bracket [r_{j-1}, r_{j+1}]; anchor the integral at the smaller rate u(r_{j+1})
        jb = min(j + 1, len(r) - 1)
        anchor_u, anchor_F = u[jb], F[jb]

        def objective(t):
            ut = R / t
            F_t = anchor_F + self.integrate_inv_el([anchor_u], [ut], p)[0] if ut > anchor_u else anchor_F
            return (ut - R) / F_t if np.isfinite(F_t) and F_t > 0 else 0.0

        x, v = golden_max(
            lambda t: np.array([objective(float(ti)) for ti in np.atleast_1d(t)]),
            [r[max(j - 1, 0)]], [r[jb]], R_TOL,
        )
        if v[0] >= vals[j]:
            return float(v[0]), float(x[0])
        return float(vals[j]), float(r[j])

    def Einf(self, R: float) -> ExponentPoint:
        """Blokh-Zyablov exponent."""
        self._check_rate(R, self.C)
        p = self._optimize_p(lambda q, refine: self._einf_for_p(R, q, refine)[0])
        E, r_star = self._einf_for_p(R, p)
        return ExponentPoint(R, max(E, 0.0), r_o=r_star, p_X=p)

    def _optimize_p(self, value) -> np.ndarray:
        """Shared input distribution for the multilevel exponents."""
        if self.symmetric:
            return self.uniform
        if self.nx > MAX_GENERAL_INPUTS:
            raise ExponentDomainError(f"general optimiser limited to |X| <= {MAX_GENERAL_INPUTS}")
        p, _ = simplex_maximize(
            lambda P: np.array([value(q, False) for q in P]), self.nx, min_step=1e-4
        )
        return p


# module-level convenience wrappers


def gallager_E0(rho: float, p_X, ch: ChannelModel) -> float:
    return ExponentCalculator(ch).E0(rho, p_X)


def gallager_Ex(rho: float, p_X, ch: ChannelModel) -> float:
    return ExponentCalculator(ch).Ex(rho, p_X)


def E_L(R: float, p_X, ch: ChannelModel) -> float:
    return ExponentCalculator(ch).E_L(R, p_X).E


def gallager_E(R: float, ch: ChannelModel) -> float:
    return ExponentCalculator(ch).E(R).E


def forney_Ec(R: float, ch: ChannelModel) -> tuple[float, float]:
    pt = ExponentCalculator(ch).Ec(R)
    return pt.E, pt.r_o


def bz_Em(R: float, m: int, ch: ChannelModel) -> float:
    return ExponentCalculator(ch).Em(R, m).E


def bz_Einf(R: float, ch: ChannelModel) -> float:
    return ExponentCalculator(ch).Einf(R).E


VARIANTS = ("gallager", "forney", "bz_m", "bz_inf")


def compute_curve(calc: ExponentCalculator, variant: str, rates, m: int | None = None) -> ExponentCurve:
    name = f"bz_m:{m}" if variant == "bz_m" else variant
    curve = ExponentCurve(name, calc.ch.name)
    for R in rates:
        if variant == "gallager":
            pt = calc.E(R)
        elif variant == "forney":
            pt = calc.Ec(R)
        elif variant == "bz_m":
            pt = calc.Em(R, m)
        elif variant == "bz_inf":
            pt = calc.Einf(R)
        else:
            raise ValueError(f"unknown exponent variant {variant!r}")
        curve.points.append(pt)
    return curve
