"""Small estimation helpers shared by the Monte Carlo modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BLOCK_LENGTH = 100


@dataclass
class EstimateWithError:
    """A Monte Carlo estimate with its standard error and sample count."""

    value: float
    stderr: float
    n_samples: int

    def __str__(self):
        return f"{self.value:.6g} +/- {self.stderr:.2g} (n={self.n_samples})"


def block_stderr(values: np.ndarray, block: int = BLOCK_LENGTH) -> float:
    """Standard error of the mean from non-overlapping block means.

    Blocks of length `block` absorb the Markov correlation of trajectory
    summands; i.i.d. formulas would understate the error.  Falls back to
    the i.i.d. estimate when fewer than two full blocks exist.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2:
        return 0.0
    n_blocks = n // block
    if n_blocks < 2:
        return float(values.std(ddof=1) / np.sqrt(n))
    trimmed = values[: n_blocks * block].reshape(n_blocks, block)
    means = trimmed.mean(axis=1)
    if np.all(means == means[0]):
        return 0.0
    return float(means.std(ddof=1) / np.sqrt(n_blocks))


def mean_with_block_error(values: np.ndarray, block: int = BLOCK_LENGTH) -> EstimateWithError:
    values = np.asarray(values, dtype=float)
    return EstimateWithError(float(values.mean()), block_stderr(values, block), len(values))


def weighted_mean_with_error(values: np.ndarray, weights: np.ndarray) -> EstimateWithError:
    """Weighted mean with the linearized standard error sqrt(sum w_i^2 (v_i - m)^2)."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    m = float(np.dot(weights, values))
    se = float(np.sqrt(np.sum((weights * (values - m)) ** 2)))
    return EstimateWithError(m, se, len(values))
