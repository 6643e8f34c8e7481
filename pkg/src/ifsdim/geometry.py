"""Open set condition checkers: plain, strong (image separation), and
regular (uniform ball-intersection density).

One-dimensional affine and piecewise-affine maps are handled by exact
interval arithmetic; everything else is Monte Carlo and the report says
so.  No sampled result is presented as a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (DegenerateSet, OscViolated, UnsupportedGeometry)
from .maps import Affine1D, PiecewiseAffine1D
from .model import IfsSystem


class OpenSet:
    """Finite union of open boxes; intervals in d=1.

    Canonicalization sorts components and merges genuine overlaps; touching
    open intervals stay separate components.
    """

    def __init__(self, boxes):
        boxes = np.asarray(boxes, dtype=float)
        if boxes.ndim == 2:  # (m, 2) intervals
            boxes = boxes[:, None, :]
        if boxes.ndim != 3 or boxes.shape[2] != 2 or len(boxes) == 0:
            raise DegenerateSet("need a nonempty list of (lo, hi) boxes")
        if np.any(boxes[:, :, 0] >= boxes[:, :, 1]):
            raise DegenerateSet("every box needs lo < hi in each coordinate")
        self.d = boxes.shape[1]
        if self.d == 1:
            order = np.argsort(boxes[:, 0, 0])
            boxes = boxes[order]
            merged = [boxes[0]]
            for b in boxes[1:]:
                if b[0, 0] < merged[-1][0, 1]:
                    merged[-1] = merged[-1].copy()
                    merged[-1][0, 1] = max(merged[-1][0, 1], b[0, 1])
                else:
                    merged.append(b)
            boxes = np.stack(merged)
        self.boxes = boxes

    @classmethod
    def from_intervals(cls, intervals: Sequence) -> "OpenSet":
        return cls(np.asarray(intervals, dtype=float))

    @property
    def intervals(self) -> np.ndarray:
        if self.d != 1:
            raise UnsupportedGeometry("intervals view is d=1 only")
        return self.boxes[:, 0, :]

    def volume(self) -> float:
        return float(np.prod(self.boxes[:, :, 1] - self.boxes[:, :, 0], axis=1).sum())

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = np.zeros(len(pts), dtype=bool)
        for b in self.boxes:
            inside |= np.all((pts > b[:, 0]) & (pts < b[:, 1]), axis=1)
        return inside

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        widths = self.boxes[:, :, 1] - self.boxes[:, :, 0]
        vols = np.prod(widths, axis=1)
        cdf = np.cumsum(vols / vols.sum())
        idx = np.minimum(np.searchsorted(cdf, rng.random(count), side="right"),
                         len(vols) - 1)
        u = rng.random((count, self.d))
        return self.boxes[idx, :, 0] + u * widths[idx]

    def __repr__(self):
        return f"OpenSet(d={self.d}, components={len(self.boxes)})"


def _exact_1d_supported(system: IfsSystem) -> bool:
    return system.d == 1 and all(
        isinstance(m, (Affine1D, PiecewiseAffine1D)) for m in system.maps)


def _image_intervals_1d(system: IfsSystem, i: int, U: OpenSet) -> np.ndarray:
    """Exact image of an interval union under map i as an interval union.

    Each component is split at the map's breakpoints; on an affine piece
    the image is the interval between the endpoint values.
    """
    m = system.maps[i - 1]
    out = []
    for a, b in U.intervals:
        cuts = [a] + [float(t) for t in m.breakpoints if a < t < b] + [b]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            # endpoint values of the affine piece; one-sided at breakpoints
            v_lo = _piece_value(m, lo, toward=hi)
            v_hi = _piece_value(m, hi, toward=lo)
            out.append([min(v_lo, v_hi), max(v_lo, v_hi)])
    return OpenSet.from_intervals(out).intervals


def _piece_value(m, x: float, toward: float) -> float:
    """Value of the affine piece active on the open side of x facing `toward`."""
    if isinstance(m, Affine1D):
        return m.slope * x + m.intercept
    side = "right" if toward > x else "left"
    j = int(np.searchsorted(m.bp, x, side="left" if side == "left" else "right"))
    return float(m.a[j] * x + m.c[j])


@dataclass
class OscReport:
    containment_pass: bool
    disjointness_pass: bool
    separation_r1: float = 0.0
    regularity: Optional[tuple] = None
    witnesses: dict = field(default_factory=dict)
    certified: bool = True
    note: str = ""


def check_osc(system: IfsSystem, U: OpenSet, budget: int = 1000, seed: int = 0,
              containment_target: Optional[OpenSet] = None) -> OscReport:
    """h_i(U) inside U and pairwise disjoint.

    Exact for 1-d affine/piecewise-affine systems; otherwise Monte Carlo
    with `certified=False` ("sampled, not certified").  When U is the
    truncation of an infinite indexed family, `containment_target` can
    name a larger truncation so the top component's outward image is not
    misread as a violation (disjointness is always tested within U itself).
    """
    if budget < 100:
        raise ValueError("budget must be >= 100")
    target = containment_target if containment_target is not None else U
    if _exact_1d_supported(system):
        images = [_image_intervals_1d(system, i, U) for i in range(1, system.k + 1)]
        report = OscReport(True, True)
        uiv = target.intervals
        for i, img in enumerate(images, start=1):
            for lo, hi in img:
                covered = np.any((uiv[:, 0] <= lo) & (hi <= uiv[:, 1]))
                if not covered:
                    report.containment_pass = False
                    report.witnesses[f"containment_h{i}"] = np.array([(lo + hi) / 2])
                    break
        for i in range(system.k):
            for j in range(i + 1, system.k):
                for a1, b1 in images[i]:
                    for a2, b2 in images[j]:
                        lo, hi = max(a1, a2), min(b1, b2)
                        if lo < hi:
                            report.disjointness_pass = False
                            report.witnesses[f"overlap_h{i+1}_h{j+1}"] = np.array([(lo + hi) / 2])
        if report.disjointness_pass:
            report.separation_r1 = _min_gap(images)
        return report

    rng = np.random.default_rng(seed)
    pts = U.sample(budget, rng)
    report = OscReport(True, True, certified=False, note="sampled, not certified")
    images_pts = []
    for i in range(1, system.k + 1):
        img = np.atleast_2d(system.apply_many(i, pts))
        if img.shape[0] != len(pts):
            img = img.T
        inside = target.contains(img)
        if not inside.all():
            report.containment_pass = False
            report.witnesses[f"containment_h{i}"] = pts[int(np.argmin(inside))]
        images_pts.append(img)
    for i in range(system.k):
        m_j_candidates = range(i + 1, system.k)
        for j in m_j_candidates:
            mj = system.maps[j]
            if not hasattr(mj, "inverse"):
                raise UnsupportedGeometry(
                    f"map {j+1} has no inverse; cannot test overlap by sampling")
            pre = np.atleast_2d(mj.inverse(images_pts[i]))
            hit = U.contains(pre)
            if hit.any():
                report.disjointness_pass = False
                report.witnesses[f"overlap_h{i+1}_h{j+1}"] = images_pts[i][int(np.argmax(hit))]
    if report.disjointness_pass:
        gaps = []
        for i in range(system.k):
            for j in range(i + 1, system.k):
                diff = images_pts[i][:, None, :] - images_pts[j][None, :, :]
                gaps.append(float(np.sqrt((diff ** 2).sum(axis=-1)).min()))
        report.separation_r1 = min(gaps) if gaps else 0.0
    return report


def _min_gap(images: list[np.ndarray]) -> float:
    gap = math.inf
    k = len(images)
    for i in range(k):
        for j in range(i + 1, k):
            for a1, b1 in images[i]:
                for a2, b2 in images[j]:
                    gap = min(gap, max(a2 - b1, a1 - b2, 0.0))
    return 0.0 if gap is math.inf else gap


def check_sosc(system: IfsSystem, U: OpenSet, budget: int = 1000, seed: int = 0) -> float:
    """Minimum distance between distinct image sets (the separation R1).

    Exact in the 1-d interval mode; requires plain OSC disjointness first.
    """
    report = check_osc(system, U, budget=max(budget, 100), seed=seed)
    if not report.disjointness_pass:
        raise OscViolated("images overlap; no separation constant exists")
    return report.separation_r1


def check_rosc(system: IfsSystem, U: OpenSet, r_grid: Optional[Sequence[float]] = None,
               budget: int = 200, seed: int = 0) -> tuple:
    """Regularity constants (R2, R3): for every radius in the grid, the
    worst sampled ball keeps at least R3 * r^d of volume inside U.

    Exact interval lengths in d=1 (with deterministic near-boundary
    probes); Monte Carlo volume in d=2.  R2 is the largest grid radius,
    R3 the corresponding infimum over radii and sampled centers.
    """
    if U.volume() <= 0:
        raise DegenerateSet("open set has zero volume")
    widths = U.boxes[:, :, 1] - U.boxes[:, :, 0]
    min_width = float(widths.min())
    if r_grid is None:
        r_grid = [0.495 * min_width, 0.25 * min_width, 0.125 * min_width, 0.0625 * min_width]
    r_grid = sorted((float(r) for r in r_grid), reverse=True)
    if any(r <= 0 for r in r_grid):
        raise ValueError("radii must be positive")

    rng = np.random.default_rng(seed)
    samples = U.sample(budget, rng)
    r3 = math.inf
    for r in r_grid:
        probes = [samples]
        for b in U.boxes:
            eps = min(r, float(np.min(b[:, 1] - b[:, 0]))) * 1e-9
            probes.append((b[:, 0] + eps)[None, :])
            probes.append((b[:, 1] - eps)[None, :])
        xs = np.concatenate(probes, axis=0)
        if U.d == 1:
            vols = _interval_ball_volumes(U, xs[:, 0], r)
            ratios = vols / r
        elif U.d == 2:
            ratios = np.array([_mc_ball_volume(U, x, r, rng) / r ** 2 for x in xs])
        else:
            raise UnsupportedGeometry("regularity check supports d=1 and d=2")
        r3 = min(r3, float(ratios.min()))
    return (r_grid[0], r3)


def _interval_ball_volumes(U: OpenSet, xs: np.ndarray, r: float) -> np.ndarray:
    lo = xs - r
    hi = xs + r
    total = np.zeros(len(xs))
    for a, b in U.intervals:
        total += np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    return total


def _mc_ball_volume(U: OpenSet, x: np.ndarray, r: float, rng: np.random.Generator,
                    n: int = 512) -> float:
    u = rng.random((n, 2))
    ang = 2 * math.pi * u[:, 0]
    rad = r * np.sqrt(u[:, 1])
    pts = x + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return math.pi * r * r * float(U.contains(pts).mean())
