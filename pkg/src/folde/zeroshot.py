"""Naturalness scoring and zero-shot batch selection.

Naturalness of a mutant is the sum over mutated positions of the log-likelihood
ratio between the replacement and the original residue. Effects of separate
mutations are summed in log space, so multi-mutant scores are additive over
their constituent singles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import AA_INDEX, LogProbMatrix, Variant


def naturalness_score(
    variant: Variant, logprobs: LogProbMatrix, reference: str | None = None
) -> float:
    """Sum of log P(replacement) - log P(original) over the variant's mutations."""
    total = 0.0
    for m in variant.mutations:
        if not 1 <= m.position <= logprobs.length:
            raise IndexError(
                f"{m.render()} outside log-prob matrix of length {logprobs.length}"
            )
        if reference is not None and reference[m.position - 1] != m.from_aa:
            raise ValueError(
                f"{m.render()} inconsistent with reference at {m.position}"
            )
        row = logprobs.values[m.position - 1]
        total += float(row[AA_INDEX[m.to_aa]] - row[AA_INDEX[m.from_aa]])
    return total


@dataclass
class NaturalnessTable:
    """Precomputed naturalness per variant; wild type scores exactly 0."""

    scores: dict[Variant, float] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        variants: list[Variant],
        logprobs: LogProbMatrix,
        reference: str | None = None,
    ) -> "NaturalnessTable":
        return cls({v: naturalness_score(v, logprobs, reference) for v in variants})

    def __getitem__(self, variant: Variant) -> float:
        return self.scores[variant]


def rank_by_naturalness(
    candidates: list[Variant], logprobs: LogProbMatrix
) -> list[Variant]:
    """Candidates sorted by descending naturalness.

    Ties break toward the lower mutated position, then the alphabetically
    earlier replacement, so the ordering is independent of input permutation.
    """
    scored = [(naturalness_score(v, logprobs), v) for v in candidates]
    scored.sort(key=lambda sv: (-sv[0], sv[1].sort_key()))
    return [v for _, v in scored]


def zero_shot_select(
    candidates: list[Variant],
    logprobs: LogProbMatrix,
    n: int,
    per_locus_cap: int | None = None,
) -> list[Variant]:
    """The n highest-naturalness candidates, optionally capped per locus.

    With a cap, a candidate is skipped whenever taking it would leave any
    single position mutated in more than ``per_locus_cap`` selections. The cap
    is a practical diversity guard for live campaigns; simulations leave it
    unset.
    """
    if not candidates:
        raise ValueError("empty candidate list")
    if n > len(candidates):
        raise ValueError(f"requested {n} of {len(candidates)} candidates")
    ranked = rank_by_naturalness(candidates, logprobs)
    if per_locus_cap is None:
        return ranked[:n]
    if per_locus_cap < 1:
        raise ValueError(f"per_locus_cap must be >= 1, got {per_locus_cap}")
    selected: list[Variant] = []
    locus_counts: dict[int, int] = {}
    for variant in ranked:
        if len(selected) == n:
            break
        if any(locus_counts.get(p, 0) >= per_locus_cap for p in variant.positions):
            continue
        selected.append(variant)
        for p in variant.positions:
            locus_counts[p] = locus_counts.get(p, 0) + 1
    return selected
