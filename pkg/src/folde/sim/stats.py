"""One-sided Wilcoxon signed-rank test, exact for small samples.

The exact path counts sign patterns by dynamic programming over doubled ranks
(average ranks are half-integers, so doubling keeps everything integral).
Above the exact cutoff a normal approximation with tie correction and
continuity correction takes over.
"""

from __future__ import annotations

import math

import numpy as np

from .metrics import average_ranks

EXACT_MAX_N = 25


def wilcoxon_one_sided(differences) -> float:
    """P(rank sum of positive differences >= observed) under the signed null.

    Tests the alternative "differences tend to be positive". Zero differences
    are dropped before ranking; ties among absolute values get average ranks.
    """
    d = np.asarray(differences, dtype=np.float64)
    if not np.all(np.isfinite(d)):
        raise ValueError("differences must be finite")
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        raise ValueError("all differences are zero")
    ranks = average_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= EXACT_MAX_N:
        return _exact_upper_tail(ranks, w_plus)
    return _normal_upper_tail(ranks, w_plus, n)


def _exact_upper_tail(ranks: np.ndarray, w_plus: float) -> float:
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    # counts[s] = number of sign patterns whose positive doubled-rank sum is s
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    observed = int(round(2.0 * w_plus))
    return float(counts[observed:].sum() / 2.0 ** len(ranks))


def _normal_upper_tail(ranks: np.ndarray, w_plus: float, n: int) -> float:
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    variance -= float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    if variance <= 0:
        raise ValueError("zero variance under the null (all ranks tied away)")
    z = (w_plus - mean - 0.5) / math.sqrt(variance)
    return 0.5 * math.erfc(z / math.sqrt(2.0))
