"""Landscape oracle with a holdout partition, and candidate-pool expansion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import ALPHABET, Dataset, Mutation, Variant


class PoolExhaustedError(RuntimeError):
    """The expansion produced no unmeasured candidates."""


@dataclass
class LandscapeOracle:
    """Half the dataset is selectable ("visible"); the rest is held out.

    Selection is restricted to the visible pool; metric thresholds always come
    from the full dataset so replicates stay comparable.
    """

    dataset: Dataset
    visible: list[Variant]
    holdout: list[Variant]
    _activities: dict[Variant, float] = field(init=False, repr=False)
    _visible_set: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        all_vs = set(self.dataset.variants)
        vis, hold = set(self.visible), set(self.holdout)
        if vis | hold != all_vs or vis & hold:
            raise ValueError("visible/holdout must partition the dataset")
        self._activities = self.dataset.activity_map()
        self._visible_set = frozenset(vis)

    @classmethod
    def split(
        cls, dataset: Dataset, seed: int, holdout_fraction: float = 0.5
    ) -> "LandscapeOracle":
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x501D]))
        variants = dataset.variants
        n_holdout = int(round(holdout_fraction * len(variants)))
        held = set(rng.choice(len(variants), size=n_holdout, replace=False).tolist())
        visible = [v for i, v in enumerate(variants) if i not in held]
        holdout = [v for i, v in enumerate(variants) if i in held]
        return cls(dataset=dataset, visible=visible, holdout=holdout)

    def activity(self, variant: Variant) -> float:
        if variant not in self._visible_set:
            raise KeyError(f"{variant} is not in the visible pool")
        return self._activities[variant]

    def holdout_activities(self) -> np.ndarray:
        return np.array([self._activities[v] for v in self.holdout])


def single_mutation_neighbors(parent: Variant, reference: str) -> list[Variant]:
    """All variants whose sequence differs from the parent's at exactly one site.

    Includes additions at fresh positions, substitutions at already-mutated
    positions, and reversions back to the reference letter.
    """
    by_position = {m.position: m for m in parent.mutations}
    neighbors = []
    for pos in range(1, len(reference) + 1):
        ref_aa = reference[pos - 1]
        current = by_position[pos].to_aa if pos in by_position else ref_aa
        for aa in ALPHABET:
            if aa == current:
                continue
            others = tuple(m for p, m in sorted(by_position.items()) if p != pos)
            if aa == ref_aa:
                neighbors.append(Variant(others))  # reversion
            else:
                neighbors.append(Variant(others + (Mutation(pos, ref_aa, aa),)))
    return neighbors


DEFAULT_EXPANSION_PARENTS = 4


def expand_candidates(
    measured: list[tuple[Variant, float]],
    reference: str,
    visible_pool: list[Variant],
    round_index: int,
    top_parents: int = DEFAULT_EXPANSION_PARENTS,
) -> list[Variant]:
    """Single-mutation neighborhood of the wild type and the best measured variants.

    Parents are the wild type plus the ``top_parents`` highest-activity
    measured variants so far; the union of their one-mutation neighborhoods is
    intersected with the unmeasured visible pool. Output preserves pool order.
    """
    if round_index < 2:
        raise ValueError("expansion applies from round 2 onward")
    measured_set = {v for v, _ in measured}
    parents = [Variant()]
    ranked = sorted(measured, key=lambda va: -va[1])
    parents += [v for v, _ in ranked[:top_parents]]
    neighborhood: set[Variant] = set()
    for parent in parents:
        neighborhood.update(single_mutation_neighbors(parent, reference))
    out = [v for v in visible_pool if v in neighborhood and v not in measured_set]
    if not out:
        raise PoolExhaustedError(
            f"no unmeasured candidates within one mutation of {len(parents)} parents"
        )
    return out
