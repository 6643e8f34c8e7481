"""Dimension measurement for empirical invariant measures: local log-log
mass regression, a word-filtered cover construction for the upper-bound
exponent, and a mass-scaling (Frostman-type) check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (AllCentersDiscarded, BudgetExceeded, InsufficientRange,
                     UnsupportedGeometry)
from .model import IfsSystem
from .rng import mix_seed
from .simulate import EmpiricalMeasure

MASS_FLOOR_COUNT = 50
MASS_CAP = 0.5


def ball_mass(measure: EmpiricalMeasure, x, r: float) -> float:
    """Weight of the closed ball B_r(x); exact for the point cloud."""
    return measure.ball_mass(x, r)


@dataclass
class LocalDimEstimate:
    center: np.ndarray
    radii: np.ndarray
    log_masses: np.ndarray
    slope: float
    r2: float
    saturated: bool = False


def _dyadic_radii(r0: float, levels: int) -> np.ndarray:
    return r0 * np.power(2.0, -np.arange(levels, dtype=float))


def local_dimension(measure: EmpiricalMeasure, x, r0: float, levels: int) -> LocalDimEstimate:
    """Least-squares slope of log nu(B_r(x)) against log r over dyadic radii.

    Radii with fewer than MASS_FLOOR_COUNT points are shot noise and radii
    holding over half the mass are saturated; both are discarded.  If the
    cap alone leaves fewer than 3 radii (genuinely flat mass, e.g. an
    atom), the fit falls back to the floor-filtered radii and is flagged.
    """
    if levels < 4:
        raise ValueError("levels must be >= 4")
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    radii = _dyadic_radii(r0, levels)
    masses = measure.ball_masses(x, radii)
    floor = MASS_FLOOR_COUNT / measure.n
    # below ~1e-13 of the coordinate scale the cloud is quantized to the
    # float grid (deep contraction runs collide exactly); such radii
    # measure representation artifacts, not the measure
    resolvable = radii >= 1e-13 * max(1.0, float(np.max(np.abs(x))))
    above = (masses >= min(floor, 1.0)) & resolvable
    keep = above & (masses <= MASS_CAP)
    saturated = False
    if keep.sum() < 3:
        if above.sum() >= 3:
            keep = above
            saturated = True
        else:
            raise InsufficientRange(
                f"only {int(keep.sum())} radii between the mass floor and cap")
    r = radii[keep]
    logm = np.log(masses[keep])
    logr = np.log(r)
    lr = logr - logr.mean()
    lm = logm - logm.mean()
    denom = float(np.dot(lr, lr))
    if denom == 0.0:
        raise InsufficientRange("degenerate radii grid")
    slope = float(np.dot(lr, lm) / denom)
    ss_tot = float(np.dot(lm, lm))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.dot(lm - slope * lr, lm - slope * lr)) / ss_tot
    return LocalDimEstimate(x, r, logm, slope, r2, saturated)


@dataclass
class CenterRecord:
    center: np.ndarray
    slope: float
    r2: float
    discarded: bool


@dataclass
class DimensionSummary:
    median: float
    q10: float
    q90: float
    n_valid: int
    n_discarded: int
    records: list[CenterRecord] = field(default_factory=list)


def measure_dimension(measure: EmpiricalMeasure, n_centers: int = 64,
                      r0: Optional[float] = None, levels: int = 16,
                      seed: int = 0) -> DimensionSummary:
    """Quantiles of local-dimension slopes at centers drawn from the cloud.

    Centers are nu-distributed (sampled from the cloud by weight), matching
    the almost-everywhere character of local dimension.
    """
    if n_centers < 10:
        raise ValueError("n_centers must be >= 10")
    if r0 is None:
        r0 = measure.diameter() / 8.0
    rng = np.random.default_rng(seed)
    idx = measure.sample_indices(n_centers, rng)
    records = []
    slopes = []
    for i in idx:
        c = measure.points[int(i)]
        try:
            est = local_dimension(measure, c, r0, levels)
        except InsufficientRange:
            records.append(CenterRecord(c, math.nan, math.nan, True))
            continue
        records.append(CenterRecord(c, est.slope, est.r2, False))
        slopes.append(est.slope)
    if not slopes:
        raise AllCentersDiscarded("no center had enough usable radii")
    arr = np.array(slopes)
    q10, med, q90 = np.quantile(arr, [0.1, 0.5, 0.9])
    return DimensionSummary(float(med), float(q10), float(q90),
                            len(slopes), len(records) - len(slopes), records)


@dataclass
class CoverReport:
    """Result of the filtered-word cover construction.

    `critical_exponent` is the smallest grid t with sum(diam^t) <= 1, the
    sum running over the whole filtered word family via importance
    weights.  `mass_covered` estimates the nu-mass reached by that family
    (box mass times per-box kept fraction).  `num_sets` counts the cover
    sets physically sampled; when the family is larger than the word
    budget, `family_subsampled` is set and the sums remain unbiased.
    """

    n: int
    epsilon: float
    k_filter: float
    num_sets: int
    diam_min: float
    diam_median: float
    diam_max: float
    critical_exponent: float
    mass_covered: float
    family_subsampled: bool
    t_grid: np.ndarray
    log_sums: np.ndarray
    diameters: np.ndarray
    is_log_weights: np.ndarray


def _quantile_boxes(measure: EmpiricalMeasure, n_boxes: int):
    """Split the sorted cloud into equal-count boxes; returns
    (lo, hi, center, mass) arrays."""
    xs = measure._sorted_x
    n = len(xs)
    n_boxes = min(n_boxes, n)
    edges = np.linspace(0, n, n_boxes + 1).astype(int)
    lo, hi, mid, mass = [], [], [], []
    for j in range(n_boxes):
        a, b = edges[j], edges[j + 1]
        if b <= a:
            continue
        lo.append(xs[a])
        hi.append(xs[b - 1])
        mid.append(xs[(a + b) // 2])
        mass.append((b - a) / n)
    return (np.array(lo), np.array(hi), np.array(mid), np.array(mass))


def _logsumexp(values: np.ndarray) -> float:
    if len(values) == 0:
        return -math.inf
    hi = float(np.max(values))
    if hi == -math.inf:
        return -math.inf
    return hi + math.log(float(np.sum(np.exp(values - hi))))


def cover_upper_bound(system: IfsSystem, measure: EmpiricalMeasure, n: int,
                      epsilon: float = 0.05, t_grid: Optional[Sequence[float]] = None,
                      seed: int = 0, n_boxes: int = 32, word_budget: int = 65536,
                      require_full_family: bool = False) -> CoverReport:
    """Numerical cover: filter length-n words by two-sided typicality bounds
    on their exact probability and derivative product, push quantile boxes
    of the cloud through the kept words, and find the smallest t with
    sum(diam^t) <= 1.

    Words are sampled by running the chain from a point in each box; the
    kept-fraction threshold 1-epsilon fixes the filter constant K as the
    smallest power of 2 reaching it.  Sums over the kept family weight each
    sample by 1/(word probability), so they estimate the full family, not
    just the sampled words.
    """
    if system.d != 1:
        raise UnsupportedGeometry("cover construction is implemented for d=1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < epsilon < 0.25:
        raise ValueError("epsilon must lie in (0, 1/4)")
    if t_grid is None:
        t_grid = (np.arange(1, 65) / 64.0) * system.d
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    if np.any(t_grid <= 0) or t_grid[-1] > system.d + 1e-12:
        raise ValueError("t_grid must be increasing in (0, d]")

    pts = measure.points[:, 0]
    pm = system.prob_matrix(measure.points)
    logp_maps = np.log(pm)
    logd_maps = np.column_stack(
        [np.log(system.deriv_norm_many(i, pts)) for i in range(1, system.k + 1)])
    eta_hat = float(np.dot(measure.weights, (pm * logp_maps).sum(axis=1)))
    lambda_hat = float(np.dot(measure.weights, (pm * logd_maps).sum(axis=1)))

    family_bound = math.exp(min(-n * (1.0 + epsilon) * eta_hat, 700.0))
    m_words = int(min(family_bound, float(word_budget)))
    subsampled = family_bound > word_budget
    if subsampled and require_full_family:
        raise BudgetExceeded(
            f"family bound {family_bound:.3g} exceeds word budget {word_budget}")
    m_words = max(m_words, 256)

    lo, hi, centers, box_mass = _quantile_boxes(measure, n_boxes)
    n_boxes_eff = len(centers)
    per_box = max(1, m_words // n_boxes_eff)

    all_logp, all_logd, all_logdiam, all_box = [], [], [], []
    all_words = []
    for b in range(n_boxes_eff):
        rng = np.random.default_rng(mix_seed(seed, b))
        cur = np.full(per_box, centers[b])
        img_lo = np.full(per_box, lo[b])
        img_hi = np.full(per_box, hi[b])
        logp = np.zeros(per_box)
        logd = np.zeros(per_box)
        # image widths leave double precision once contraction passes the
        # mantissa; from then on the log-width advances by the local slope
        # (the interval is far inside a single affine piece by that point)
        with np.errstate(divide="ignore"):
            log_diam = np.log(img_hi - img_lo)
        collapsed = ~np.isfinite(log_diam)
        words = np.empty((per_box, n), dtype=np.int8)
        for step in range(n):
            pmat = system.prob_matrix(cur[:, None])
            cdf = np.cumsum(pmat, axis=1)
            u = rng.random(per_box)
            syms = (u[:, None] >= cdf).sum(axis=1) + 1
            syms = np.minimum(syms, system.k)
            words[:, step] = syms
            logp += np.log(pmat[np.arange(per_box), syms - 1])
            step_slope = np.empty(per_box)
            for s in range(1, system.k + 1):
                mask = syms == s
                if mask.any():
                    step_slope[mask] = np.log(system.deriv_norm_many(s, cur[mask]))
                    cur[mask] = system.apply_many(s, cur[mask])
                    img_lo[mask] = system.apply_many(s, img_lo[mask])
                    img_hi[mask] = system.apply_many(s, img_hi[mask])
            logd += step_slope
            was_collapsed = collapsed.copy()
            log_diam[was_collapsed] += step_slope[was_collapsed]
            live = np.where(~was_collapsed)[0]
            if len(live):
                width = np.abs(img_hi[live] - img_lo[live])
                scale = np.maximum(np.abs(img_lo[live]), np.abs(img_hi[live]))
                trustworthy = width > 1e-8 * np.maximum(scale, 1e-300)
                ok_idx = live[trustworthy]
                with np.errstate(divide="ignore"):
                    log_diam[ok_idx] = np.log(width[trustworthy])
                gone = live[~trustworthy]
                log_diam[gone] += step_slope[gone]
                collapsed[gone] = True
        all_logp.append(logp)
        all_logd.append(logd)
        all_logdiam.append(log_diam)
        all_box.append(np.full(per_box, b))
        all_words.append(words)

    logp = np.concatenate(all_logp)
    logd = np.concatenate(all_logd)
    log_diam = np.concatenate(all_logdiam)
    box_id = np.concatenate(all_box)
    words = np.concatenate(all_words, axis=0)
    n_samples = len(logp)

    # smallest K = 2^j keeping at least 1-epsilon of the sampled words
    slack_p = n * epsilon * abs(eta_hat)
    slack_d = n * epsilon * abs(lambda_hat)
    dev_p = np.abs(logp - n * eta_hat)
    dev_d = np.abs(logd - n * lambda_hat)
    kept = np.zeros(n_samples, dtype=bool)
    log_k = 0.0
    for j in range(0, 4096):
        log_k = j * math.log(2.0)
        kept = (dev_p <= slack_p + log_k) & (dev_d <= slack_d + log_k)
        if kept.mean() >= 1.0 - epsilon:
            break

    kept_idx = np.flatnonzero(kept)
    per_box_counts = np.bincount(box_id, minlength=n_boxes_eff).astype(float)
    kept_per_box = np.bincount(box_id[kept_idx], minlength=n_boxes_eff).astype(float)
    kept_frac_per_box = np.divide(kept_per_box, per_box_counts,
                                  out=np.zeros_like(kept_per_box), where=per_box_counts > 0)
    mass_covered = float(np.dot(box_mass, np.minimum(kept_frac_per_box, 1.0)))

    # physical distinct sets for reporting
    key = np.concatenate([words[kept_idx].astype(np.int16),
                          box_id[kept_idx, None].astype(np.int16)], axis=1)
    _, uniq_idx = np.unique(key.view([("", np.int16)] * key.shape[1]).ravel(), return_index=True)
    uniq = kept_idx[np.sort(uniq_idx)]
    log_diam_uniq = log_diam[uniq]
    num_sets = len(uniq)

    # importance-weighted family sums, all in log space
    log_w = -logp[kept_idx] - np.log(per_box_counts[box_id[kept_idx]])
    log_diam_kept_is = log_diam[kept_idx]
    log_sums = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        log_sums[i] = _logsumexp(t * log_diam_kept_is + log_w)
    below = np.flatnonzero(log_sums <= 0.0)
    critical = float(t_grid[below[0]]) if len(below) else math.nan

    finite = log_diam_uniq[np.isfinite(log_diam_uniq)]
    return CoverReport(
        n=n,
        epsilon=float(epsilon),
        k_filter=math.exp(log_k) if log_k < 700 else math.inf,
        num_sets=num_sets,
        diam_min=float(np.exp(finite.min())) if len(finite) else 0.0,
        diam_median=float(np.exp(np.median(finite))) if len(finite) else 0.0,
        diam_max=float(np.exp(finite.max())) if len(finite) else 0.0,
        critical_exponent=critical,
        mass_covered=mass_covered,
        family_subsampled=bool(subsampled),
        t_grid=t_grid,
        log_sums=log_sums,
        diameters=np.exp(log_diam_uniq),
        is_log_weights=log_w[np.searchsorted(kept_idx, uniq)],
    )


@dataclass
class FrostmanReport:
    s_test: float
    passed: bool
    pass_fraction: float
    worst_ratio: float
    n_centers_used: int


def frostman_check(measure: EmpiricalMeasure, s_test: float, n_centers: int = 64,
                   r0: Optional[float] = None, levels: int = 16,
                   seed: int = 0) -> FrostmanReport:
    """Check that nu(B_r(x)) / (2r)^s decays as r shrinks at typical centers.

    Finite-sample proxy for a vanishing limsup: at >= 90% of centers, the
    ratio at each of the 3 smallest surviving radii must sit at or below
    the ratio at the largest surviving radius.  Consecutive-step
    comparisons alone are defeated by the log-periodic staircase of
    self-similar measures; anchoring at the coarse end spans enough scale
    for the decay to dominate the oscillation.
    """
    if s_test <= 0:
        raise ValueError("s_test must be positive")
    if r0 is None:
        r0 = measure.diameter() / 8.0
        if r0 <= 0:
            r0 = 1.0
    rng = np.random.default_rng(seed)
    idx = measure.sample_indices(n_centers, rng)
    radii = _dyadic_radii(r0, levels)
    floor = MASS_FLOOR_COUNT / measure.n
    n_used = 0
    n_pass = 0
    worst = 0.0
    for i in idx:
        c = measure.points[int(i)]
        masses = measure.ball_masses(c, radii)
        keep = (masses >= min(floor, 1.0)) & \
            (radii >= 1e-13 * max(1.0, float(np.max(np.abs(c)))))
        if keep.sum() < 3:
            continue
        r = radii[keep]
        q = masses[keep] / np.power(2.0 * r, s_test)
        worst = max(worst, float(q.max()))
        n_used += 1
        if np.all(q[-3:] <= q[0] * (1.0 + 1e-12)):
            n_pass += 1
    if n_used == 0:
        raise InsufficientRange("no center had 3 radii above the mass floor")
    frac = n_pass / n_used
    return FrostmanReport(float(s_test), frac >= 0.9, frac, worst, n_used)
