"""IFS systems: maps plus a place-dependent probability field, with checkers
for the standing hypotheses (normalized probabilities above a floor, bounded
log-derivatives, average contraction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateDomain, NonFinitePoint, OutOfRangeSymbol
from .maps import finite_diff_deriv_norm

PROB_NORMALIZATION_TOL = 1e-12


class GaussianWeight:
    """w(x) = base + amp * exp(-||x - center||^2 / width^2), nonnegative."""

    def __init__(self, base: float, amp: float = 0.0, center=0.0, width: float = 1.0):
        self.base = float(base)
        self.amp = float(amp)
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.width = float(width)
        if self.base < 0 or self.amp < 0 or (self.base == 0 and self.amp == 0):
            raise ValueError("weight must be positive somewhere: base, amp >= 0, not both 0")
        if self.width <= 0:
            raise ValueError("width must be positive")

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        diff = xs - self.center
        sq = np.sum(diff * diff, axis=-1)
        return self.base + self.amp * np.exp(-sq / self.width ** 2)


class ConstantField:
    """Probability vector independent of position."""

    kind = "constant"

    def __init__(self, p: Sequence[float]):
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or len(p) < 1:
            raise ValueError("p must be a nonempty vector")
        if np.any(p <= 0) or abs(p.sum() - 1.0) > PROB_NORMALIZATION_TOL:
            raise ValueError("p must be positive and sum to 1")
        self.p = p
        self.k = len(p)
        self.p_min = float(p.min())

    def vector(self, x) -> np.ndarray:
        return self.p

    def matrix(self, xs: np.ndarray) -> np.ndarray:
        n = np.shape(xs)[0]
        return np.broadcast_to(self.p, (n, self.k))


class SmoothField:
    """Pointwise-normalized weights p_i(x) = w_i(x) / sum_j w_j(x).

    `p_min` is the declared lower bound on every p_i; validate_system
    samples for violations rather than trusting the declaration.
    """

    kind = "smooth"

    def __init__(self, weights: Sequence[GaussianWeight], p_min: float):
        if len(weights) < 1:
            raise ValueError("need at least one weight")
        if not (0 < p_min < 1):
            raise ValueError("p_min must lie in (0, 1)")
        self.weights = tuple(weights)
        self.k = len(weights)
        self.p_min = float(p_min)

    def vector(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w = np.array([wt.eval_many(x[None, :])[0] for wt in self.weights])
        return w / w.sum()

    def matrix(self, xs: np.ndarray) -> np.ndarray:
        cols = [wt.eval_many(xs) for wt in self.weights]
        w = np.column_stack(cols)
        return w / w.sum(axis=1, keepdims=True)


class IfsSystem:
    """An IFS on R^d: k maps and a probability field; immutable."""

    def __init__(self, d: int, maps: Sequence, probs, domain=None):
        if d < 1:
            raise ValueError("d must be >= 1")
        if len(maps) < 1:
            raise ValueError("need at least one map")
        for m in maps:
            if getattr(m, "dim", d) != d:
                raise ValueError(f"map {m!r} has dimension {m.dim}, system has {d}")
        if probs.k != len(maps):
            raise ValueError("probability field arity must equal number of maps")
        self.d = int(d)
        self.maps = tuple(maps)
        self.probs = probs
        self.domain = domain
        self.k = len(maps)

    def __repr__(self):
        return f"IfsSystem(d={self.d}, k={self.k}, probs={self.probs.kind})"

    def _check_symbol(self, i: int) -> None:
        if not 1 <= i <= self.k:
            raise OutOfRangeSymbol(f"symbol {i} outside 1..{self.k}")

    def as_point(self, x) -> np.ndarray:
        pt = np.atleast_1d(np.asarray(x, dtype=float))
        if pt.shape != (self.d,):
            raise ValueError(f"point has shape {pt.shape}, expected ({self.d},)")
        if not np.all(np.isfinite(pt)):
            raise NonFinitePoint(f"non-finite point {x!r}")
        return pt

    def eval_map(self, i: int, x):
        """h_i(x); scalar in/out for d=1, length-d vectors otherwise."""
        self._check_symbol(i)
        pt = self.as_point(x)
        out = self.maps[i - 1].apply(pt[0] if self.d == 1 else pt)
        return float(out) if self.d == 1 else np.asarray(out, dtype=float)

    def apply_many(self, i: int, xs: np.ndarray) -> np.ndarray:
        self._check_symbol(i)
        return self.maps[i - 1].apply(xs)

    def derivative_norm(self, i: int, x, side: Optional[str] = None) -> float:
        """||Dh_i(x)||, analytic for every built-in family."""
        self._check_symbol(i)
        pt = self.as_point(x)
        return float(self.maps[i - 1].deriv_norm(pt[0] if self.d == 1 else pt, side=side))

    def deriv_norm_many(self, i: int, xs: np.ndarray) -> np.ndarray:
        self._check_symbol(i)
        return self.maps[i - 1].deriv_norm_many(xs)

    def lipschitz_log_bound(self, i: int, y) -> float:
        """Upper bound on sup_z log(d(h_i y, h_i z) / d(y, z))."""
        self._check_symbol(i)
        pt = self.as_point(y)
        return self.maps[i - 1].chord_log_bound(pt[0] if self.d == 1 else pt)

    def probability_vector(self, x) -> np.ndarray:
        pt = self.as_point(x)
        return np.asarray(self.probs.vector(pt), dtype=float)

    def prob_matrix(self, xs: np.ndarray) -> np.ndarray:
        return self.probs.matrix(np.asarray(xs, dtype=float))

    @property
    def breakpoints(self) -> np.ndarray:
        """Union of piecewise breakpoints over all maps (d=1 only)."""
        pts = [m.breakpoints for m in self.maps]
        return np.unique(np.concatenate(pts)) if pts else np.empty(0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: Optional[np.ndarray] = None
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            tag = "pass" if c.passed else "FAIL"
            msg = f"{tag}  {c.name}"
            if not c.passed and c.witness is not None:
                msg += f"  (witness x={np.asarray(c.witness).tolist()})"
            if c.detail:
                msg += f"  [{c.detail}]"
            out.append(msg)
        return out

    def __str__(self):
        return "\n".join(self.lines())


def _domain_boxes(system: IfsSystem, domain) -> np.ndarray:
    """Normalize a sampling domain to an array of boxes (m, d, 2)."""
    d = system.d
    if domain is None:
        domain = system.domain
    if domain is None:
        box = np.stack([np.full(d, -10.0), np.full(d, 10.0)], axis=-1)
        return box[None, :, :]
    if hasattr(domain, "boxes"):
        return np.asarray(domain.boxes, dtype=float)
    lo, hi = domain
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return np.stack([lo, hi], axis=-1)[None, :, :]


def _sample_in_boxes(boxes: np.ndarray, u_comp: np.ndarray, u_pos: np.ndarray) -> np.ndarray:
    """Map uniforms to points in a box union, weighted by box volume."""
    widths = boxes[:, :, 1] - boxes[:, :, 0]
    vols = np.prod(widths, axis=1)
    total = vols.sum()
    if total <= 0:
        raise DegenerateDomain("sampling domain has zero volume")
    cdf = np.cumsum(vols) / total
    idx = np.searchsorted(cdf, u_comp, side="right")
    idx = np.minimum(idx, len(vols) - 1)
    lo = boxes[idx, :, 0]
    return lo + u_pos * widths[idx]


def validate_system(system: IfsSystem, sample_budget: int = 2000, seed: int = 0,
                    domain=None) -> ValidationReport:
    """Sample-based check of the standing hypotheses.

    Failures are report entries with a witnessing point, never exceptions.
    """
    if sample_budget < 1:
        raise ValueError("sample_budget must be >= 1")
    rng = np.random.default_rng(seed)
    boxes = _domain_boxes(system, domain)
    u = rng.random((sample_budget, 1 + system.d))
    xs = _sample_in_boxes(boxes, u[:, 0], u[:, 1:])

    report = ValidationReport()

    pm = system.prob_matrix(xs)
    sums = pm.sum(axis=1)
    bad = np.abs(sums - 1.0) > PROB_NORMALIZATION_TOL
    report.checks.append(CheckResult(
        "probabilities normalized",
        not bad.any(),
        xs[bad.argmax()] if bad.any() else None,
        f"max |sum-1| = {np.max(np.abs(sums - 1.0)):.3e}",
    ))

    floor = getattr(system.probs, "p_min", 0.0)
    low = pm.min(axis=1) < floor - PROB_NORMALIZATION_TOL
    report.checks.append(CheckResult(
        f"probabilities above declared floor {floor}",
        not low.any(),
        xs[low.argmax()] if low.any() else None,
        f"min p_i = {pm.min():.3e}",
    ))

    deriv_lo, deriv_hi = math.inf, 0.0
    lo_witness = hi_witness = None
    finite_ok = True
    finite_witness = None
    for i in range(1, system.k + 1):
        imgs = np.asarray(system.apply_many(i, xs[:, 0] if system.d == 1 else xs))
        if not np.all(np.isfinite(imgs)):
            finite_ok = False
            ok_rows = np.isfinite(imgs.reshape(len(xs), -1)).all(axis=1)
            finite_witness = xs[int(np.argmin(ok_rows))]
        dn = system.deriv_norm_many(i, xs[:, 0] if system.d == 1 else xs)
        j_lo, j_hi = int(np.argmin(dn)), int(np.argmax(dn))
        if dn[j_lo] < deriv_lo:
            deriv_lo, lo_witness = float(dn[j_lo]), xs[j_lo]
        if dn[j_hi] > deriv_hi:
            deriv_hi, hi_witness = float(dn[j_hi]), xs[j_hi]
    report.checks.append(CheckResult(
        "maps finite on sampled domain", finite_ok, finite_witness))
    report.checks.append(CheckResult(
        "derivative bounded below (log h' > -inf)",
        deriv_lo > 0 and math.isfinite(deriv_lo),
        lo_witness if not (deriv_lo > 0) else None,
        f"min h' = {deriv_lo:.6g}",
    ))
    report.checks.append(CheckResult(
        "derivative bounded above",
        math.isfinite(deriv_hi),
        hi_witness if not math.isfinite(deriv_hi) else None,
        f"max h' = {deriv_hi:.6g}",
    ))

    # analytic vs finite-difference derivative on a small subsample,
    # skipping points too close to a breakpoint for a clean central step
    n_fd = min(50, sample_budget)
    fd_ok = True
    fd_witness = None
    worst = 0.0
    for i in range(1, system.k + 1):
        m = system.maps[i - 1]
        bps = m.breakpoints
        for x in xs[:n_fd]:
            x1 = x[0] if system.d == 1 else x
            if system.d == 1 and len(bps) and np.min(np.abs(bps - x1)) < 1e-4 * max(1.0, abs(x1)):
                continue
            analytic = m.deriv_norm(x1, side="right")
            if analytic <= 0:
                continue
            fd = finite_diff_deriv_norm(m, x1)
            rel = abs(fd - analytic) / analytic
            if rel > worst:
                worst = rel
                if rel > 1e-5:
                    fd_ok = False
                    fd_witness = x
    report.checks.append(CheckResult(
        "analytic derivative matches finite difference",
        fd_ok, fd_witness, f"worst rel err = {worst:.3e}"))

    return report


@dataclass
class MarginEstimate:
    """Monte Carlo estimate of the average-contraction supremum.

    `sup_estimate` is a lower bound on the true supremum (a sup probed by
    sampling can only be underestimated); a negative value means no
    violating pair was found at this budget, not a certificate.
    """

    sup_estimate: float
    b_lower: float
    samples_used: int
    worst_pair: tuple

    @property
    def contracting_on_average(self) -> bool:
        return self.sup_estimate < 0


def average_contraction_margin(system: IfsSystem, sampling_domain=None,
                               budget: int = 4096, seed: int = 0) -> MarginEstimate:
    """Estimate sup over pairs x != y of sum_j p_j(x) log(d(h_j x, h_j y) / d(x, y)).

    Pair sampling mixes uniform pairs, near-diagonal pairs with log-uniform
    separations down to 1e-9 of the domain diameter, and pairs straddling
    piecewise breakpoints.  Extending the budget with the same seed only
    extends the pair set, so the returned sup is monotone in budget.
    """
    if budget < 2:
        raise ValueError("budget must be >= 2")
    boxes = _domain_boxes(system, sampling_domain)
    d = system.d
    widths = boxes[:, :, 1] - boxes[:, :, 0]
    if np.any(widths <= 0) or boxes.shape[0] == 0:
        raise DegenerateDomain("empty or zero-width sampling domain")
    dom_lo = boxes[:, :, 0].min(axis=0)
    dom_hi = boxes[:, :, 1].max(axis=0)
    diam = float(np.linalg.norm(dom_hi - dom_lo))

    rng = np.random.default_rng(seed)
    # fixed per-pair draw count keeps any prefix of the pair set stable
    u = rng.random((budget, 4 + 2 * d))

    xs = _sample_in_boxes(boxes, u[:, 0], u[:, 2:2 + d])
    ys_uniform = _sample_in_boxes(boxes, u[:, 1], u[:, 2 + d:2 + 2 * d])

    # near-diagonal offsets, log-uniform in [1e-9, 1] * diam
    scale = diam * np.power(10.0, -9.0 * u[:, 2])
    direction = ys_uniform - xs
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    ys_near = xs + direction / norms * scale[:, None]
    ys_near = np.clip(ys_near, dom_lo, dom_hi)

    bps = system.breakpoints if d == 1 else np.empty(0)
    cat = np.arange(budget) % 5
    ys = ys_uniform.copy()
    near_mask = (cat == 2) | (cat == 3)
    ys[near_mask] = ys_near[near_mask]
    if len(bps):
        straddle = cat == 4
        b_idx = np.minimum((u[:, 3] * len(bps)).astype(int), len(bps) - 1)
        b = bps[b_idx]
        eps = diam * np.power(10.0, -9.0 * u[:, 2])
        xs_s = (b - eps)[:, None]
        ys_s = (b + eps)[:, None]
        inside = _points_in_boxes(xs_s, boxes) & _points_in_boxes(ys_s, boxes)
        take = straddle & inside
        xs[take] = xs_s[take]
        ys[take] = ys_s[take]

    sep = np.linalg.norm(xs - ys, axis=1)
    valid = sep > 0
    xs, ys, sep = xs[valid], ys[valid], sep[valid]
    if len(xs) < 1:
        raise DegenerateDomain("no valid pairs with x != y")

    pm = system.prob_matrix(xs)
    total = np.zeros(len(xs))
    with np.errstate(divide="ignore"):
        for j in range(1, system.k + 1):
            hx = system.apply_many(j, xs[:, 0] if d == 1 else xs)
            hy = system.apply_many(j, ys[:, 0] if d == 1 else ys)
            if d == 1:
                dist = np.abs(hx - hy)
            else:
                dist = np.linalg.norm(hx - hy, axis=1)
            total += pm[:, j - 1] * np.log(dist / sep)

    i_max = int(np.argmax(total))
    sup = float(total[i_max])
    return MarginEstimate(
        sup_estimate=sup,
        b_lower=-sup,
        samples_used=len(xs),
        worst_pair=(xs[i_max].copy(), ys[i_max].copy()),
    )


def _points_in_boxes(pts: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    inside = np.zeros(len(pts), dtype=bool)
    for box in boxes:
        lo, hi = box[:, 0], box[:, 1]
        inside |= np.all((pts > lo) & (pts < hi), axis=1)
    return inside
