"""Ergodic averages along trajectories: Lyapunov exponent, entropy rate,
their dimension ratio, and probabilistic tail diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (EmptyMeasure, NonNegativeLyapunov, TooFewTrajectories,
                     TooShort)
from .simulate import EmpiricalMeasure, Trajectory
from .stats import EstimateWithError, mean_with_block_error

MIN_TRAJECTORY_LEN = 100


def lyapunov_exponent(traj: Trajectory) -> EstimateWithError:
    """Mean of the per-step log derivative norms.

    Estimates the nu-average of sum_j p_j(x) log||Dh_j(x)||; the error bar
    comes from length-100 block means, since trajectory summands are
    Markov-correlated.
    """
    if len(traj) < MIN_TRAJECTORY_LEN:
        raise TooShort(f"need >= {MIN_TRAJECTORY_LEN} steps, got {len(traj)}")
    return mean_with_block_error(traj.log_deriv)


def entropy_rate(traj: Trajectory) -> EstimateWithError:
    """Mean of the per-step log selection probabilities (a negative number)."""
    if len(traj) < MIN_TRAJECTORY_LEN:
        raise TooShort(f"need >= {MIN_TRAJECTORY_LEN} steps, got {len(traj)}")
    return mean_with_block_error(traj.log_prob)


def dimension_ratio(eta: float, lam: float) -> float:
    """Entropy-over-Lyapunov dimension s = eta / lambda (both negative)."""
    if not lam < 0:
        raise NonNegativeLyapunov(f"lambda = {lam} is not negative")
    if eta > 0:
        raise ValueError(f"eta = {eta} must be <= 0")
    return eta / lam


@dataclass
class TailReport:
    """One row of the Chebyshev tail diagnostic at threshold log K."""

    log_k: float
    empirical_tail: float
    chebyshev_bound: float
    sum_variance: float     # estimated Var of the centered n-step sum
    step_variance: float
    n: int
    n_trajectories: int
    within_bound: bool


def deviation_diagnostic(trajectories: Sequence[Trajectory],
                         logk_grid: Sequence[float]) -> list[TailReport]:
    """Check the variance/Chebyshev tail bound on centered log-derivative sums.

    For trajectories of common length n, S = sum(log_deriv) - n*lambda_hat;
    the fraction with S > log K must stay below v*n/(log K)^2 (plus three
    binomial standard errors of the empirical fraction).
    """
    m = len(trajectories)
    if m < 30:
        raise TooFewTrajectories(f"need >= 30 trajectories, got {m}")
    n = len(trajectories[0])
    if any(len(t) != n for t in trajectories):
        raise ValueError("trajectories must share a common length")

    sums = np.array([t.log_deriv.sum() for t in trajectories])
    total_mean = float(sums.mean() / n)
    centered = sums - n * total_mean

    sq = 0.0
    for t in trajectories:
        diff = t.log_deriv - total_mean
        sq += float(np.dot(diff, diff))
    denom = m * n - 1
    step_var = sq / denom if denom > 0 else 0.0

    reports = []
    for log_k in logk_grid:
        log_k = float(log_k)
        if log_k <= 0:
            raise ValueError("log K thresholds must be positive")
        tail = float(np.mean(centered > log_k))
        bound = step_var * n / log_k ** 2
        se = np.sqrt(tail * (1.0 - tail) / m)
        reports.append(TailReport(
            log_k=log_k,
            empirical_tail=tail,
            chebyshev_bound=bound,
            sum_variance=step_var * n,
            step_variance=step_var,
            n=n,
            n_trajectories=m,
            within_bound=bool(tail <= bound + 3.0 * se),
        ))
    return reports


def log_moment(measure: EmpiricalMeasure, x0) -> EstimateWithError:
    """nu-average of log^+ d(x, x0) over the sample cloud.

    Finiteness of this moment is what lets trajectory averages ignore how
    far away the chain starts.
    """
    if measure.n == 0:
        raise EmptyMeasure("empty measure")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if measure.d == 1:
        dist = np.abs(measure.points[:, 0] - x0[0])
    else:
        dist = np.linalg.norm(measure.points - x0, axis=1)
    vals = np.zeros(measure.n)
    far = dist > 1.0
    vals[far] = np.log(dist[far])
    mean = float(np.dot(measure.weights, vals))
    se = float(np.sqrt(np.sum((measure.weights * (vals - mean)) ** 2)))
    return EstimateWithError(mean, se, measure.n)
