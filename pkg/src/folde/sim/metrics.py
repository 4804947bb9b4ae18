"""Campaign success metrics: percentile hits, rank correlation, batch loci diversity."""

from __future__ import annotations

import numpy as np

from ..core import Dataset, Variant

TOP_DECILE_PERCENTILE = 90.0
TOP_PERCENTILE = 99.0
DIFFICULTY_PERCENTILE = 99.375  # activity reachable by ten random rounds of 16


def average_ranks(values) -> np.ndarray:
    """Ranks 1..n with ties assigned the average of their positions."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> float:
    """Rank correlation with average ranks for ties."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    if len(a) < 2:
        raise ValueError("need at least 2 observations")
    ra, rb = average_ranks(a), average_ranks(b)
    sa, sb = ra.std(), rb.std()
    if sa == 0.0 or sb == 0.0:
        raise ValueError("zero rank variance")
    return float(np.mean((ra - ra.mean()) * (rb - rb.mean())) / (sa * sb))


def activity_threshold(dataset: Dataset, percentile: float) -> float:
    """Linear-interpolated activity percentile over the full dataset."""
    return float(np.percentile(dataset.activities, percentile))


def top_decile_hits(selected: list[Variant], dataset: Dataset) -> int:
    """How many selected variants sit at or above the 90th activity percentile."""
    threshold = activity_threshold(dataset, TOP_DECILE_PERCENTILE)
    lookup = dataset.activity_map()
    return sum(1 for v in selected if lookup[v] >= threshold)


def top_percentile_success(selected: list[Variant], dataset: Dataset) -> bool:
    """Whether any selected variant reaches the 99th activity percentile."""
    if not selected:
        return False
    threshold = activity_threshold(dataset, TOP_PERCENTILE)
    lookup = dataset.activity_map()
    return any(lookup[v] >= threshold for v in selected)


def batch_loci_diversity(
    batch: list[Variant], history: list[list[Variant]]
) -> tuple[int, int]:
    """(unique loci mutated in the batch, loci never mutated in earlier batches)."""
    loci = {p for v in batch for p in v.positions}
    seen = {p for earlier in history for v in earlier for p in v.positions}
    return len(loci), len(loci - seen)


def difficulty(dataset: Dataset) -> float:
    """Relative activity of the 99.375th-percentile mutant on a 0..1 scale."""
    acts = dataset.activities
    if len(np.unique(acts)) < 2:
        raise ValueError("difficulty undefined: all activities equal")
    lo, hi = float(acts.min()), float(acts.max())
    return (float(np.percentile(acts, DIFFICULTY_PERCENTILE)) - lo) / (hi - lo)
