"""Chaos-game simulation, empirical measures with ball queries, and grid
iteration of the transfer operator in one dimension.

All randomness flows through numpy Generators seeded explicitly; a run is
a pure function of (system, inputs, seed).  Multi-trajectory runs derive
per-trajectory seeds with rng.mix_seed so results are identical at any
worker count.
"""

from __future__ import annotations

import os
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, NonFiniteOrbit
from .maps import Affine1D, PiecewiseAffine1D
from .model import ConstantField, IfsSystem
from .rng import mix_seed

DEFAULT_BURN_IN = 10_000


@dataclass
class Trajectory:
    """One chaos-game run after burn-in.

    symbols[t] produced points[t] from the previous point; log_deriv and
    log_prob are evaluated at that pre-image point.
    """

    points: np.ndarray     # (n, d)
    symbols: np.ndarray    # (n,), values in 1..k
    log_deriv: np.ndarray  # (n,)
    log_prob: np.ndarray   # (n,)
    seed: int
    burn_in: int

    def __len__(self):
        return len(self.symbols)

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _draw_symbols_constant(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return (np.searchsorted(cdf, u, side="right") + 1).astype(np.int64)


def _orbit_1d(system: IfsSystem, x0: float, symbols: np.ndarray) -> np.ndarray:
    """Sequential 1-d orbit given the full symbol sequence."""
    total = len(symbols)
    out = np.empty(total)
    if all(isinstance(m, Affine1D) for m in system.maps):
        a = np.array([m.slope for m in system.maps])[symbols - 1].tolist()
        c = np.array([m.intercept for m in system.maps])[symbols - 1].tolist()
        x = float(x0)
        for t in range(total):
            x = a[t] * x + c[t]
            out[t] = x
        return out
    if all(isinstance(m, (Affine1D, PiecewiseAffine1D)) for m in system.maps):
        tables = []
        for m in system.maps:
            if isinstance(m, Affine1D):
                tables.append(((), (m.slope,), (m.intercept,)))
            else:
                tables.append((m.bp.tolist(), m.a.tolist(), m.c.tolist()))
        syms = symbols.tolist()
        x = float(x0)
        for t in range(total):
            bp, a, c = tables[syms[t] - 1]
            j = bisect_right(bp, x)
            x = a[j] * x + c[j]
            out[t] = x
        return out
    x = float(x0)
    for t in range(total):
        x = float(system.maps[symbols[t] - 1].apply(x))
        out[t] = x
    return out


def _orbit_nd(system: IfsSystem, x0: np.ndarray, symbols: np.ndarray) -> np.ndarray:
    total = len(symbols)
    out = np.empty((total, system.d))
    x = x0.copy()
    for t in range(total):
        x = np.asarray(system.maps[symbols[t] - 1].apply(x), dtype=float)
        out[t] = x
    return out


def _orbit_logs(system: IfsSystem, x0, orbit: np.ndarray, symbols: np.ndarray):
    """Vectorized log ||Dh|| and log p at the pre-image of every step."""
    if system.d == 1:
        pre = np.empty_like(orbit)
        pre[0] = x0
        pre[1:] = orbit[:-1]
        pre_pts = pre[:, None]
    else:
        pre = np.empty_like(orbit)
        pre[0] = x0
        pre[1:] = orbit[:-1]
        pre_pts = pre
    log_deriv = np.empty(len(symbols))
    with np.errstate(divide="ignore"):
        for s in range(1, system.k + 1):
            mask = symbols == s
            if mask.any():
                arg = pre[mask] if system.d == 1 else pre_pts[mask]
                log_deriv[mask] = np.log(system.deriv_norm_many(s, arg))
        if isinstance(system.probs, ConstantField):
            log_prob = np.log(system.probs.p)[symbols - 1]
        else:
            pm = system.prob_matrix(pre_pts)
            log_prob = np.log(pm[np.arange(len(symbols)), symbols - 1])
    return log_deriv, log_prob


def chaos_game(system: IfsSystem, x0, n_steps: int, burn_in: int = DEFAULT_BURN_IN,
               seed: int = 0) -> Trajectory:
    """Simulate x_{t+1} = h_{w}(x_t) with w drawn from the probability
    vector at x_t by inverse CDF; the stored trajectory excludes burn-in.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    pt = system.as_point(x0)
    total = burn_in + n_steps
    rng = np.random.default_rng(seed)
    u = rng.random(total)

    if isinstance(system.probs, ConstantField):
        cdf = np.cumsum(system.probs.p)
        cdf[-1] = 1.0
        symbols = _draw_symbols_constant(cdf, u)
        if system.d == 1:
            orbit = _orbit_1d(system, float(pt[0]), symbols)
        else:
            orbit = _orbit_nd(system, pt, symbols)
    else:
        symbols = np.empty(total, dtype=np.int64)
        orbit = np.empty(total) if system.d == 1 else np.empty((total, system.d))
        x = float(pt[0]) if system.d == 1 else pt
        for t in range(total):
            pvec = system.probs.vector(np.atleast_1d(x))
            cdf = np.cumsum(pvec)
            cdf[-1] = 1.0
            s = int(np.searchsorted(cdf, u[t], side="right")) + 1
            symbols[t] = s
            x = system.maps[s - 1].apply(x)
            x = float(x) if system.d == 1 else np.asarray(x, dtype=float)
            orbit[t] = x

    if not np.all(np.isfinite(orbit)):
        ok = np.isfinite(orbit.reshape(total, -1)).all(axis=1)
        raise NonFiniteOrbit(int(np.argmin(ok)))

    log_deriv, log_prob = _orbit_logs(system, pt[0] if system.d == 1 else pt, orbit, symbols)
    pts = orbit[:, None] if system.d == 1 else orbit
    return Trajectory(
        points=pts[burn_in:].copy(),
        symbols=symbols[burn_in:].copy(),
        log_deriv=log_deriv[burn_in:].copy(),
        log_prob=log_prob[burn_in:].copy(),
        seed=seed,
        burn_in=burn_in,
    )


def _chaos_game_batch_1d(system: IfsSystem, x0: float, n_traj: int, n_steps: int,
                         burn_in: int, master_seed: int) -> list[Trajectory]:
    """Lockstep vectorized variant for constant fields in d=1.

    Bit-identical to per-trajectory chaos_game: each trajectory's symbols
    come from its own child generator, and the map arithmetic is the same
    IEEE expression applied elementwise.
    """
    total = burn_in + n_steps
    cdf = np.cumsum(system.probs.p)
    cdf[-1] = 1.0
    seeds = [mix_seed(master_seed, i) for i in range(n_traj)]
    symbols = np.empty((n_traj, total), dtype=np.int64)
    for i, s in enumerate(seeds):
        u = np.random.default_rng(s).random(total)
        symbols[i] = _draw_symbols_constant(cdf, u)

    orbits = np.empty((n_traj, total))
    x = np.full(n_traj, float(x0))
    all_affine = all(isinstance(m, Affine1D) for m in system.maps)
    if all_affine:
        a = np.array([m.slope for m in system.maps])
        c = np.array([m.intercept for m in system.maps])
        for t in range(total):
            idx = symbols[:, t] - 1
            x = a[idx] * x + c[idx]
            orbits[:, t] = x
    else:
        for t in range(total):
            col = symbols[:, t]
            nxt = np.empty_like(x)
            for s in range(1, system.k + 1):
                mask = col == s
                if mask.any():
                    nxt[mask] = system.maps[s - 1].apply(x[mask])
            x = nxt
            orbits[:, t] = x

    out = []
    for i in range(n_traj):
        orbit = orbits[i]
        if not np.all(np.isfinite(orbit)):
            raise NonFiniteOrbit(int(np.argmin(np.isfinite(orbit))))
        ld, lp = _orbit_logs(system, float(x0), orbit, symbols[i])
        out.append(Trajectory(
            points=orbit[burn_in:, None].copy(),
            symbols=symbols[i, burn_in:].copy(),
            log_deriv=ld[burn_in:].copy(),
            log_prob=lp[burn_in:].copy(),
            seed=seeds[i],
            burn_in=burn_in,
        ))
    return out


def chaos_game_many(system: IfsSystem, x0, n_traj: int, n_steps: int,
                    burn_in: int = DEFAULT_BURN_IN, master_seed: int = 0,
                    threads: Optional[int] = None) -> list[Trajectory]:
    """Independent trajectories with per-index child seeds from mix_seed.

    `threads` (default: available parallelism) only changes wall time;
    trajectory i depends solely on (master_seed, i) and results are merged
    in index order.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if isinstance(system.probs, ConstantField) and system.d == 1:
        return _chaos_game_batch_1d(system, float(system.as_point(x0)[0]),
                                    n_traj, n_steps, burn_in, master_seed)
    seeds = [mix_seed(master_seed, i) for i in range(n_traj)]
    if threads is None:
        threads = os.cpu_count() or 1
    if threads > 1 and n_traj > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futs = [pool.submit(chaos_game, system, x0, n_steps, burn_in, s) for s in seeds]
            return [f.result() for f in futs]
    return [chaos_game(system, x0, n_steps, burn_in, s) for s in seeds]


class EmpiricalMeasure:
    """Weighted point cloud with exact ball-mass queries.

    d=1 uses a sorted coordinate array with binary-search range counting;
    d=2 uses uniform grid buckets with an exact distance filter.  Queries
    on a built measure are read-only and thread-safe.
    """

    def __init__(self, points: np.ndarray, weights: Optional[np.ndarray] = None,
                 cell_size: Optional[float] = None):
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if len(points) == 0:
            raise EmptyInput("measure needs at least one point")
        self.points = points
        self.n, self.d = points.shape
        if weights is None:
            self._uniform_w = 1.0 / self.n
            self.weights = np.full(self.n, self._uniform_w)
        else:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != (self.n,) or np.any(weights < 0):
                raise ValueError("weights must be nonnegative, one per point")
            if abs(weights.sum() - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1")
            self.weights = weights
            w0 = weights[0]
            self._uniform_w = w0 if np.all(weights == w0) else None
        if self.d == 1:
            self._order = np.argsort(self.points[:, 0], kind="stable")
            self._sorted_x = self.points[self._order, 0]
            self._cum_w = np.concatenate([[0.0], np.cumsum(self.weights[self._order])])
        elif self.d == 2:
            lo = self.points.min(axis=0)
            hi = self.points.max(axis=0)
            span = float(max(hi[0] - lo[0], hi[1] - lo[1], 1e-300))
            self._cell = cell_size if cell_size else span / 128.0
            self._origin = lo
            cells = np.floor((self.points - lo) / self._cell).astype(np.int64)
            self._buckets: dict = {}
            for idx, key in enumerate(map(tuple, cells)):
                self._buckets.setdefault(key, []).append(idx)
            self._buckets = {k: np.array(v) for k, v in self._buckets.items()}
        else:
            raise DimensionMismatch("spatial index supports d=1 and d=2 only")

    def _mass_of_indices(self, idx: np.ndarray) -> float:
        if self._uniform_w is not None:
            return len(idx) * self._uniform_w
        return float(self.weights[idx].sum())

    def ball_mass(self, x, r: float) -> float:
        """Total weight within closed distance r of x."""
        if r < 0:
            raise ValueError("r must be >= 0")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.d == 1:
            lo = np.searchsorted(self._sorted_x, x[0] - r, side="left")
            hi = np.searchsorted(self._sorted_x, x[0] + r, side="right")
            if self._uniform_w is not None:
                return (hi - lo) * self._uniform_w
            return float(self._cum_w[hi] - self._cum_w[lo])
        c0 = np.floor((x - self._origin - r) / self._cell).astype(np.int64)
        c1 = np.floor((x - self._origin + r) / self._cell).astype(np.int64)
        r2 = r * r
        hits = []
        for i in range(c0[0], c1[0] + 1):
            for j in range(c0[1], c1[1] + 1):
                idx = self._buckets.get((i, j))
                if idx is None:
                    continue
                diff = self.points[idx] - x
                hits.append(idx[(diff * diff).sum(axis=1) <= r2])
        if not hits:
            return 0.0
        # single reduction keeps the uniform-weight result an exact count
        return self._mass_of_indices(np.concatenate(hits))

    def ball_masses(self, x, radii: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        radii = np.asarray(radii, dtype=float)
        if self.d == 1:
            lo = np.searchsorted(self._sorted_x, x[0] - radii, side="left")
            hi = np.searchsorted(self._sorted_x, x[0] + radii, side="right")
            if self._uniform_w is not None:
                return (hi - lo) * self._uniform_w
            return self._cum_w[hi] - self._cum_w[lo]
        return np.array([self.ball_mass(x, float(r)) for r in radii])

    def mass_in_intervals(self, intervals: np.ndarray) -> float:
        """Weight inside a union of closed 1-d intervals (m, 2); exact."""
        if self.d != 1:
            raise DimensionMismatch("interval mass is d=1 only")
        iv = np.asarray(intervals, dtype=float)
        if len(iv) == 0:
            return 0.0
        iv = iv[np.argsort(iv[:, 0])]
        merged = [iv[0].copy()]
        for a, b in iv[1:]:
            if a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append(np.array([a, b]))
        mass = 0.0
        for a, b in merged:
            lo = np.searchsorted(self._sorted_x, a, side="left")
            hi = np.searchsorted(self._sorted_x, b, side="right")
            if self._uniform_w is not None:
                mass += (hi - lo) * self._uniform_w
            else:
                mass += float(self._cum_w[hi] - self._cum_w[lo])
        return mass

    def diameter(self) -> float:
        lo = self.points.min(axis=0)
        hi = self.points.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def sample_indices(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self._uniform_w is not None:
            return rng.integers(0, self.n, size=n)
        return rng.choice(self.n, size=n, p=self.weights)


def empirical_measure(trajectories: Sequence[Trajectory], thinning: int = 1) -> EmpiricalMeasure:
    """Pool every `thinning`-th point across trajectories, equal weights."""
    if not trajectories:
        raise EmptyInput("need at least one trajectory")
    if thinning < 1:
        raise ValueError("thinning must be >= 1")
    parts = [t.points[::thinning] for t in trajectories]
    pts = np.concatenate(parts, axis=0)
    if len(pts) == 0:
        raise EmptyInput("no points after thinning")
    return EmpiricalMeasure(pts)


def merge_measures(measures: Sequence[EmpiricalMeasure]) -> EmpiricalMeasure:
    """Associative pooled merge; uniform inputs stay exactly uniform."""
    if not measures:
        raise EmptyInput("nothing to merge")
    pts = np.concatenate([m.points for m in measures], axis=0)
    if all(m._uniform_w is not None for m in measures):
        return EmpiricalMeasure(pts)
    total = len(pts)
    weights = np.concatenate([m.weights * (m.n / total) for m in measures])
    weights /= weights.sum()
    return EmpiricalMeasure(pts, weights)


@dataclass
class GridMeasure:
    """Histogram measure on [a, b]; mass escaping the window is kept in
    overflow_mass rather than renormalized away."""

    a: float
    b: float
    mass: np.ndarray
    overflow_mass: float = 0.0

    @property
    def bins(self) -> int:
        return len(self.mass)

    @property
    def centers(self) -> np.ndarray:
        h = (self.b - self.a) / self.bins
        return self.a + h * (np.arange(self.bins) + 0.5)

    @classmethod
    def uniform(cls, a: float, b: float, bins: int) -> "GridMeasure":
        if bins < 2:
            raise ValueError("bins must be >= 2")
        if not b > a:
            raise ValueError("need b > a")
        return cls(float(a), float(b), np.full(bins, 1.0 / bins), 0.0)

    def l1_distance(self, other: "GridMeasure") -> float:
        return float(np.abs(self.mass - other.mass).sum()
                     + abs(self.overflow_mass - other.overflow_mass))


def transfer_iterate_1d(system: IfsSystem, init: GridMeasure, n_iters: int = 1) -> GridMeasure:
    """Iterate the transfer operator nu -> sum_i (h_i)_* (p_i * nu) on the grid.

    Each bin's mass moves from its center c to the bin containing h_i(c)
    with weight p_i(c): a point-mass pushforward, first-order accurate with
    bin count as the accuracy knob.  Total mass (bins + overflow) is
    conserved at every step.
    """
    if system.d != 1:
        raise DimensionMismatch("grid transfer is d=1 only")
    if n_iters < 0:
        raise ValueError("n_iters must be >= 0")
    a, b, bins = init.a, init.b, init.bins
    h = (b - a) / bins
    centers = init.centers
    pm = system.prob_matrix(centers[:, None])
    images = [system.apply_many(i, centers) for i in range(1, system.k + 1)]
    targets = []
    for img in images:
        inside = (img >= a) & (img <= b)
        idx = np.clip(((img - a) / h).astype(np.int64), 0, bins - 1)
        targets.append((inside, idx))

    mass = init.mass.copy()
    overflow = init.overflow_mass
    for _ in range(n_iters):
        new = np.zeros(bins)
        for i in range(system.k):
            moved = pm[:, i] * mass
            inside, idx = targets[i]
            np.add.at(new, idx[inside], moved[inside])
            overflow += float(moved[~inside].sum())
        mass = new
    return GridMeasure(a, b, mass, overflow)
