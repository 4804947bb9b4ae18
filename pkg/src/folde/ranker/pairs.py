"""Directed ranking pairs: enumeration, transitivity-aware splitting, Bradley-Terry loss.

A pair (winner, loser) records that the winner's label is strictly higher.
The train/validation split guarantees that no validation pair can be inferred
by following train pairs transitively, so validation loss measures real
generalization rather than closure of the training order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PairSet:
    """Directed (winner, loser) index pairs with an optional train partition."""

    winners: np.ndarray  # int64
    losers: np.ndarray  # int64
    n_items: int
    is_train: np.ndarray | None = None  # bool, None while unpartitioned

    def __post_init__(self):
        self.winners = np.asarray(self.winners, dtype=np.int64)
        self.losers = np.asarray(self.losers, dtype=np.int64)
        if self.winners.shape != self.losers.shape:
            raise ValueError("winners/losers length mismatch")
        if len(self.winners) and (
            self.winners.max() >= self.n_items or self.losers.max() >= self.n_items
        ):
            raise ValueError("pair index out of range")
        if np.any(self.winners == self.losers):
            raise ValueError("pair between an item and itself")

    def __len__(self) -> int:
        return len(self.winners)

    def subset(self, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.winners[mask], self.losers[mask]

    @property
    def train(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_train is None:
            raise ValueError("pair set is not partitioned")
        return self.subset(self.is_train)

    @property
    def validation(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_train is None:
            raise ValueError("pair set is not partitioned")
        return self.subset(~self.is_train)


def enumerate_pairs(labels) -> PairSet:
    """One directed pair per unequal-label item pair; ties contribute nothing."""
    labels = np.asarray(labels, dtype=np.float64)
    n = len(labels)
    if n < 2:
        raise ValueError(f"need at least 2 items, got {n}")
    iu, ju = np.triu_indices(n, k=1)
    li, lj = labels[iu], labels[ju]
    unequal = li != lj
    first_wins = li > lj
    winners = np.where(first_wins, iu, ju)[unequal]
    losers = np.where(first_wins, ju, iu)[unequal]
    return PairSet(winners, losers, n_items=n)


def subsample_pairs(pairs: PairSet, max_pairs: int, seed: int) -> PairSet:
    """Seeded uniform subsample used to bound training cost on large pools."""
    if len(pairs) <= max_pairs:
        return pairs
    rng = np.random.default_rng(seed)
    keep = rng.choice(len(pairs), size=max_pairs, replace=False)
    keep.sort()
    return PairSet(pairs.winners[keep], pairs.losers[keep], pairs.n_items)


def _reachable(adj: np.ndarray, start: int, goal: int) -> bool:
    """Breadth-first reachability over a boolean adjacency matrix."""
    frontier = adj[start].copy()
    if frontier[goal]:
        return True
    visited = frontier.copy()
    while frontier.any():
        nxt = adj[frontier].any(axis=0) & ~visited
        if nxt[goal]:
            return True
        visited |= nxt
        frontier = nxt
    return False


def split_pairs(pairs: PairSet, fraction: float = 0.8, seed: int = 0) -> PairSet:
    """Partition pairs ~fraction/1-fraction into train/validation.

    Validation pairs are accepted greedily in shuffled order, and a pair is
    only accepted if its winner cannot already reach its loser through train
    pairs (checked breadth-first). Degenerate structures simply yield fewer
    validation pairs than the target.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0,1), got {fraction}")
    if len(pairs) == 0:
        raise ValueError("cannot split an empty pair set")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    target_validation = int(round((1.0 - fraction) * len(pairs)))

    adj = np.zeros((pairs.n_items, pairs.n_items), dtype=bool)
    adj[pairs.winners, pairs.losers] = True

    is_train = np.ones(len(pairs), dtype=bool)
    n_validation = 0
    for p in order:
        if n_validation == target_validation:
            break
        w, l = int(pairs.winners[p]), int(pairs.losers[p])
        adj[w, l] = False
        if _reachable(adj, w, l):
            adj[w, l] = True
        else:
            is_train[p] = False
            n_validation += 1
    return PairSet(pairs.winners, pairs.losers, pairs.n_items, is_train=is_train)


def bt_loss(scores, winners, losers) -> float:
    """Mean Bradley-Terry negative log-likelihood, -ln sigmoid(s_w - s_l).

    Accumulated in float64; invariant to adding a constant to every score.
    """
    scores = np.asarray(scores, dtype=np.float64)
    winners = np.asarray(winners, dtype=np.int64)
    losers = np.asarray(losers, dtype=np.int64)
    if len(winners) == 0:
        raise ValueError("empty pair partition: mean loss undefined")
    margins = scores[winners] - scores[losers]
    return float(np.mean(np.logaddexp(0.0, -margins)))


def bt_loss_and_grad(scores, winners, losers) -> tuple[float, np.ndarray]:
    """Loss plus its gradient with respect to each item score."""
    scores = np.asarray(scores, dtype=np.float64)
    n_pairs = len(winners)
    if n_pairs == 0:
        raise ValueError("empty pair partition: mean loss undefined")
    margins = scores[winners] - scores[losers]
    loss = float(np.mean(np.logaddexp(0.0, -margins)))
    # d/dm of ln(1+e^-m) is -sigmoid(-m)
    coeff = -_sigmoid(-margins) / n_pairs
    grad = np.zeros_like(scores)
    np.add.at(grad, winners, coeff)
    np.add.at(grad, losers, -coeff)
    return loss, grad


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
