"""Canonical systems with known answers, for oracle tests and CLI shortcuts.

The flagship is a two-map piecewise-affine pair living on the decade bands
B_n = (10^n, 3*10^n): one map contracts by 1/20 and moves band n to band
n-1, the other expands by 5 and moves band n to band n+1.  Individually
the second map expands everywhere, but with enough weight on the first the
pair contracts on average over the band union, and its invariant measure
has a closed-form dimension.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BelowThresholdWarning, InvalidProbability, ShapeMismatch
from .geometry import OpenSet
from .maps import Affine1D, PiecewiseAffine1D
from .model import ConstantField, IfsSystem

DEFAULT_BAND_TRUNCATION = 6
MAP_BAND_COUNT = 30


@dataclass
class NamedSystem:
    name: str
    system: IfsSystem
    open_set: Optional[OpenSet] = None
    known_dimension: Optional[float] = None
    dimension_expr: str = ""
    default_x0: float = 0.0


def similitude_system(ratios: Sequence[float], translations: Sequence[float],
                      probs: Sequence[float], name: str = "similitudes") -> NamedSystem:
    """Affine contractions x -> ratio*x + translation.

    known_dimension is the measure dimension sum(p log p)/sum(p log ratio),
    valid when the images are separated by an open set.
    """
    if not (len(ratios) == len(translations) == len(probs)):
        raise ShapeMismatch("ratios, translations, probs must have equal length")
    ratios = [float(r) for r in ratios]
    if any(not 0 < r < 1 for r in ratios):
        raise ValueError("ratios must lie in (0, 1)")
    p = np.asarray(probs, dtype=float)
    maps = [Affine1D(r, t) for r, t in zip(ratios, translations)]
    system = IfsSystem(1, maps, ConstantField(p))
    dim = float(np.dot(p, np.log(p)) / np.dot(p, np.log(ratios)))
    return NamedSystem(
        name=name,
        system=system,
        known_dimension=dim,
        dimension_expr="sum(p_i log p_i) / sum(p_i log ratio_i)",
        default_x0=0.5,
    )


def cantor_system(p1: float = 0.5) -> NamedSystem:
    """x/3 and x/3 + 2/3 on (0, 1); the classical middle-third measure."""
    if not 0 < p1 < 1:
        raise InvalidProbability(f"p1={p1} outside (0, 1)")
    ns = similitude_system([1 / 3, 1 / 3], [0.0, 2 / 3], [p1, 1 - p1], name="cantor")
    ns.open_set = OpenSet.from_intervals([[0.0, 1.0]])
    return ns


def half_pair_system() -> NamedSystem:
    """x/2 and x/2 + 1/2: invariant measure is Lebesgue on [0, 1]."""
    ns = similitude_system([0.5, 0.5], [0.0, 0.5], [0.5, 0.5], name="half-pair")
    ns.open_set = OpenSet.from_intervals([[0.0, 1.0]])
    return ns


def quarter_pair_system() -> NamedSystem:
    """x/2 and x/4 + 1/2: unequal ratios, measure dimension 2/3."""
    ns = similitude_system([0.5, 0.25], [0.0, 0.5], [0.5, 0.5], name="quarter-pair")
    ns.open_set = OpenSet.from_intervals([[0.0, 1.0]])
    return ns


def expanding_pair_system() -> NamedSystem:
    """2x and 3x + 1 with even weights: expands on average (control case)."""
    maps = [Affine1D(2.0, 0.0), Affine1D(3.0, 1.0)]
    system = IfsSystem(1, maps, ConstantField([0.5, 0.5]))
    return NamedSystem(name="expanding-pair", system=system, default_x0=0.1)


def band_intervals(n_max: int) -> list:
    return [[10.0 ** n, 3.0 * 10.0 ** n] for n in range(n_max + 1)]


def _band_maps(band_count: int) -> tuple:
    """The two piecewise-affine homeomorphisms of the band construction.

    Branch formulas on B_n: down-map x/20 + 15*10^(n-2) (x/20 + 1 for
    x <= 3), up-map 5x + 5*10^n (5x + 5 for x <= 3).  Gaps between bands
    are bridged by the affine interpolation of the adjacent branch endpoint
    values; past the last band the final branch continues unchanged.  Any
    monotone bridge leaves the invariant measure untouched because orbits
    that enter the bands never leave them.
    """
    bp1, a1, c1 = [], [1 / 20], [1.0]
    bp2, a2, c2 = [], [5.0], [5.0]

    def h1_band(n):  # slope, intercept of the down-map on B_n
        return 1 / 20, 15.0 * 10.0 ** (n - 2)

    def h2_band(n):
        return 5.0, 5.0 * 10.0 ** n

    prev_end = 3.0
    prev_h1 = 1 / 20 * 3.0 + 1.0
    prev_h2 = 5.0 * 3.0 + 5.0
    for n in range(1, band_count + 1):
        lo, hi = 10.0 ** n, 3.0 * 10.0 ** n
        s1, t1 = h1_band(n)
        s2, t2 = h2_band(n)
        # bridge over the gap (prev_end, lo)
        g1 = (s1 * lo + t1 - prev_h1) / (lo - prev_end)
        bp1.append(prev_end)
        a1.append(g1)
        c1.append(prev_h1 - g1 * prev_end)
        g2 = (s2 * lo + t2 - prev_h2) / (lo - prev_end)
        bp2.append(prev_end)
        a2.append(g2)
        c2.append(prev_h2 - g2 * prev_end)
        # the band branch itself
        bp1.append(lo)
        a1.append(s1)
        c1.append(t1)
        bp2.append(lo)
        a2.append(s2)
        c2.append(t2)
        prev_end = hi
        prev_h1 = s1 * hi + t1
        prev_h2 = s2 * hi + t2
    h1 = PiecewiseAffine1D(bp1, a1, c1, homeomorphic=True)
    h2 = PiecewiseAffine1D(bp2, a2, c2, homeomorphic=True)
    return h1, h2


def decade_band_system(p1: float = 0.7, n_max: int = DEFAULT_BAND_TRUNCATION,
                  band_count: int = MAP_BAND_COUNT) -> NamedSystem:
    """The decade-band pair with constant weights (p1, 1-p1).

    `n_max` truncates the reported open set (the band family is infinite;
    reported results state the truncation).  `band_count` controls how many
    bands carry exact branch formulas before the final branch is extended;
    orbits in double precision never reach the default limit.
    """
    if not 0 < p1 < 1:
        raise InvalidProbability(f"p1={p1} outside (0, 1)")
    if n_max < 0 or band_count < max(n_max, 1):
        raise ValueError("need band_count >= n_max >= 0")
    h1, h2 = _band_maps(band_count)
    system = IfsSystem(1, [h1, h2], ConstantField([p1, 1.0 - p1]))
    dim = None
    if p1 > p1_threshold():
        dim = decade_band_dimension(p1)
    return NamedSystem(
        name="paper-example",
        system=system,
        open_set=OpenSet.from_intervals(band_intervals(n_max)),
        known_dimension=dim,
        dimension_expr="(p1 log p1 + p2 log p2) / (-2 p1 log 2 - (p1 - p2) log 5)",
        default_x0=2.0,
    )


def decade_band_dimension(p1: float) -> float:
    """Closed-form dimension of the decade-band invariant measure.

    Below the contraction threshold the value is still computable; a
    warning flags that the formula is outside its stated regime.
    """
    if not 0 < p1 < 1:
        raise InvalidProbability(f"p1={p1} outside (0, 1)")
    if p1 <= p1_threshold():
        warnings.warn(
            f"p1={p1} at or below the average-contraction threshold "
            f"{p1_threshold():.6f}; formula evaluated outside its regime",
            BelowThresholdWarning,
        )
    p2 = 1.0 - p1
    return (p1 * math.log(p1) + p2 * math.log(p2)) / (
        -2.0 * p1 * math.log(2.0) - (p1 - p2) * math.log(5.0))


def p1_threshold() -> float:
    """Smallest down-map weight with a negative average-contraction margin
    over the band union: log(50/7) / log(500/17)."""
    return math.log(50.0 / 7.0) / math.log(500.0 / 17.0)


def band_image_diagnostics(ns: NamedSystem, n_max: int = DEFAULT_BAND_TRUNCATION) -> list[dict]:
    """Which band each branch image lands in; exact interval arithmetic.

    Logged rather than asserted: the branch formulas are taken verbatim,
    and this records the images they actually produce.
    """
    bands = band_intervals(n_max)
    out = []
    for i in (1, 2):
        m = ns.system.maps[i - 1]
        for n, (lo, hi) in enumerate(bands):
            v_lo = float(m.apply(np.nextafter(lo, hi)))
            v_hi = float(m.apply(np.nextafter(hi, lo)))
            img = (min(v_lo, v_hi), max(v_lo, v_hi))
            target = next((j for j, (a, b) in enumerate(bands)
                           if a <= img[0] and img[1] <= b), None)
            out.append({"map": i, "band": n, "image": img, "lands_in_band": target})
    return out


_BUILDERS = {
    "cantor": lambda p1, n_max: cantor_system(),
    "half-pair": lambda p1, n_max: half_pair_system(),
    "quarter-pair": lambda p1, n_max: quarter_pair_system(),
    "expanding-pair": lambda p1, n_max: expanding_pair_system(),
    "paper-example": lambda p1, n_max: decade_band_system(p1, n_max),
    "decade-bands": lambda p1, n_max: decade_band_system(p1, n_max),
}


def named_system(name: str, p1: float = 0.7,
                 n_max: int = DEFAULT_BAND_TRUNCATION) -> NamedSystem:
    """Look up a built-in system by CLI name."""
    key = name.lower()
    if key not in _BUILDERS:
        raise KeyError(f"unknown system {name!r}; choose from {sorted(_BUILDERS)}")
    return _BUILDERS[key](p1, n_max)


def builtin_names() -> list[str]:
    return sorted(_BUILDERS)
