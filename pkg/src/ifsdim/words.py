"""Finite words over {1..k}, symbol streams, the coding map, and cylinder
measures on the symbol space.

Words are stored first-symbol-first (w[0] applies first in a forward
composition); reversal is always explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import EmptyMeasure, OutOfRangeSymbol, ProbabilityFloor, TooFewPoints
from .model import IfsSystem
from .rng import mix_seed
from .stats import EstimateWithError, weighted_mean_with_error

Word = tuple  # of ints in 1..k


def check_word(word: Sequence[int], k: int) -> Word:
    w = tuple(int(s) for s in word)
    for s in w:
        if not 1 <= s <= k:
            raise OutOfRangeSymbol(f"symbol {s} outside 1..{k}")
    return w


def parse_word(text: str) -> Word:
    """Parse the CLI/CSV form: a comma-free digit string like '121'."""
    if not text:
        return ()
    if not text.isdigit():
        raise ValueError(f"word must be a digit string, got {text!r}")
    return tuple(int(ch) for ch in text)


def format_word(word: Sequence[int]) -> str:
    return "".join(str(int(s)) for s in word)


class SymbolStream:
    """Deterministic source of symbols; prefix(n) is stable as n grows."""

    def prefix(self, n: int) -> np.ndarray:
        raise NotImplementedError


class FixedStream(SymbolStream):
    """A stored finite pattern with a declared tail rule."""

    def __init__(self, symbols: Sequence[int], tail: str = "cycle"):
        self.symbols = tuple(int(s) for s in symbols)
        if not self.symbols:
            raise ValueError("pattern must be nonempty")
        if tail not in ("cycle", "repeat_last"):
            raise ValueError("tail must be 'cycle' or 'repeat_last'")
        self.tail = tail

    def prefix(self, n: int) -> np.ndarray:
        base = np.array(self.symbols, dtype=np.int64)
        if n <= len(base):
            return base[:n].copy()
        if self.tail == "cycle":
            reps = -(-n // len(base))
            return np.tile(base, reps)[:n]
        out = np.full(n, base[-1], dtype=np.int64)
        out[: len(base)] = base
        return out


class RandomStream(SymbolStream):
    """Seeded i.i.d. symbols; optional weights, uniform by default."""

    def __init__(self, k: int, seed: int, weights=None):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = int(k)
        self.seed = int(seed)
        if weights is None:
            weights = np.full(k, 1.0 / k)
        weights = np.asarray(weights, dtype=float)
        if len(weights) != k or np.any(weights <= 0):
            raise ValueError("weights must be positive, length k")
        self.cdf = np.cumsum(weights / weights.sum())
        self.cdf[-1] = 1.0
        self._cache = np.empty(0, dtype=np.int64)

    def prefix(self, n: int) -> np.ndarray:
        if n > len(self._cache):
            # regenerate from scratch: Generator streams are prefix-stable
            u = np.random.default_rng(self.seed).random(max(n, 2 * len(self._cache)))
            self._cache = np.searchsorted(self.cdf, u, side="right").astype(np.int64) + 1
        return self._cache[:n].copy()

    def split(self, index: int) -> "RandomStream":
        return RandomStream(self.k, mix_seed(self.seed, index))


class PrependedStream(SymbolStream):
    """sigma_i applied to a stream: symbol i, then the original stream."""

    def __init__(self, symbol: int, inner: SymbolStream):
        self.symbol = int(symbol)
        self.inner = inner

    def prefix(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.empty(0, dtype=np.int64)
        out = np.empty(n, dtype=np.int64)
        out[0] = self.symbol
        out[1:] = self.inner.prefix(n - 1)
        return out


def compose_forward(system: IfsSystem, word: Sequence[int], x):
    """h_{w_n} o ... o h_{w_1}(x): the first symbol acts first."""
    w = check_word(word, system.k)
    y = x
    for s in w:
        y = system.eval_map(s, y)
    return y


def compose_backward(system: IfsSystem, word: Sequence[int], x):
    """h_{w_1} o ... o h_{w_n}(x): forward composition of the reversed word."""
    w = check_word(word, system.k)
    y = x
    for s in reversed(w):
        y = system.eval_map(s, y)
    return y


def word_log_stats(system: IfsSystem, word: Sequence[int], xs: np.ndarray):
    """Along-orbit totals for many start points at once.

    Returns (log_prob, log_deriv, end_points): the log of the word
    probability prod p_{w_i}(x_{i-1}), the log derivative-norm product, and
    the final images.  xs is flat (n,) for d=1, else (n, d).
    """
    w = check_word(word, system.k)
    xs = np.asarray(xs, dtype=float)
    n = xs.shape[0]
    logp = np.zeros(n)
    logd = np.zeros(n)
    cur = xs.copy()
    for s in w:
        pts = cur[:, None] if system.d == 1 and cur.ndim == 1 else cur
        pvec = system.prob_matrix(pts)[:, s - 1]
        if np.any(pvec <= 0.0):
            raise ProbabilityFloor(f"zero probability for symbol {s}")
        logp += np.log(pvec)
        logd += np.log(system.deriv_norm_many(s, cur))
        cur = system.apply_many(s, cur)
    return logp, logd, cur


def word_probability(system: IfsSystem, word: Sequence[int], x) -> float:
    """prod_{i} p_{w_i}(h_{w^{i-1}}(x)), accumulated in log space."""
    w = check_word(word, system.k)
    if not w:
        return 1.0
    pt = system.as_point(x)
    start = np.array([pt[0]]) if system.d == 1 else pt[None, :]
    logp, _, _ = word_log_stats(system, w, start)
    return float(math.exp(logp[0]))


@dataclass
class CodingResult:
    point: Union[float, np.ndarray]
    iterations_used: int
    last_increment: float
    converged: bool


CODING_RECOMPUTE_LIMIT = 10_000
CODING_CHECKPOINT_STRIDE = 64


def coding_map(system: IfsSystem, stream: SymbolStream, x0, tol: float = 1e-10,
               max_n: int = 400) -> CodingResult:
    """Limit of backward compositions h_{w_1} o ... o h_{w_n}(x0).

    Each step prepends the innermost map, so there is no O(1) recurrence;
    the prefix is re-applied from scratch (O(n^2) total) up to 1e4 steps
    and at stride-64 checkpoints beyond.  Convergence requires 3
    consecutive increments at or under `tol`: contracting-on-average
    systems take occasional expanding steps, so one small increment is not
    Cauchy evidence.  A non-converged result is a value, not an error.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    pt = system.as_point(x0)
    x_start = float(pt[0]) if system.d == 1 else pt

    # Probe set {x0, h_1(x0), ..., h_k(x0)}: the one-step increment at any
    # future n is a distance between images of two of these points, so the
    # image spread of the probe set bounds every upcoming increment.  The
    # raw increment alone is blind to x0 sitting on a fixed point of the
    # next symbols (it reads 0 without any contraction having happened).
    if system.d == 1:
        probes0 = np.array([x_start] + [system.eval_map(i, x_start)
                                        for i in range(1, system.k + 1)])
    else:
        probes0 = np.stack([x_start] + [system.eval_map(i, x_start)
                                        for i in range(1, system.k + 1)])

    def backward_probes(m: int) -> np.ndarray:
        cur = probes0.copy()
        for s in stream.prefix(m)[::-1]:
            cur = system.apply_many(int(s), cur)
        return cur

    def spread(imgs: np.ndarray) -> float:
        if system.d == 1:
            return float(np.max(imgs) - np.min(imgs))
        diff = imgs[:, None, :] - imgs[None, :, :]
        return float(np.sqrt((diff ** 2).sum(axis=-1)).max())

    y_prev = x_start
    streak = 0
    n = 1
    last_inc = math.inf
    while n <= max_n:
        imgs = backward_probes(n)
        y = imgs[0]
        inc = abs(y - y_prev) if system.d == 1 else float(np.linalg.norm(y - y_prev))
        last_inc = inc
        contracted = spread(imgs) <= tol and inc <= tol
        streak = streak + 1 if contracted else 0
        if streak >= 3:
            return CodingResult(y, n, inc, True)
        y_prev = y
        n += 1 if n < CODING_RECOMPUTE_LIMIT else CODING_CHECKPOINT_STRIDE
    return CodingResult(y_prev, min(n, max_n), last_inc, False)


def image_diameter(system: IfsSystem, word: Sequence[int], set_sample) -> float:
    """Max pairwise distance among images of the sample points.

    A lower bound on the true image diameter: only sampled points enter.
    """
    pts = [system.as_point(p) for p in set_sample]
    if len(pts) < 2:
        raise TooFewPoints("need at least 2 sample points")
    xs = np.stack(pts)
    cur = xs[:, 0] if system.d == 1 else xs
    for s in check_word(word, system.k):
        cur = system.apply_many(s, cur)
    if system.d == 1:
        return float(np.max(cur) - np.min(cur))
    diff = cur[:, None, :] - cur[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def cylinder_measure_plus(system: IfsSystem, word: Sequence[int], nu_samples) -> EstimateWithError:
    """Cylinder mass under the symbol-space measure with marginals p_x:
    the nu-average of the word probability over the sample cloud."""
    if nu_samples.n == 0:
        raise EmptyMeasure("empty sample cloud")
    w = check_word(word, system.k)
    if not w:
        return EstimateWithError(1.0, 0.0, nu_samples.n)
    xs = nu_samples.points[:, 0] if system.d == 1 else nu_samples.points
    logp, _, _ = word_log_stats(system, w, xs)
    return weighted_mean_with_error(np.exp(logp), nu_samples.weights)


def cylinder_measure_minus(system: IfsSystem, word: Sequence[int], nu_samples) -> EstimateWithError:
    """Reversed-word cylinder mass: the mirror measure of the two-sided
    extension evaluates a cylinder by reading its word backwards."""
    w = check_word(word, system.k)
    return cylinder_measure_plus(system, w[::-1], nu_samples)
