"""Selection policies: the full warm-started ranking workflow plus baselines and ablations."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..core import EmbeddingStore, LogProbMatrix, Variant
from ..ranker import (
    ACTIVITY_PHASE,
    WARM_START_PHASE,
    Ensemble,
    MlpConfig,
    predict_consensus_and_covariance,
    train_ensemble,
    warm_start_targets,
)
from ..selector import constant_liar_select, top_n_select, ucb_score
from ..zeroshot import naturalness_score, rank_by_naturalness, zero_shot_select
from .forest import rf_fit, rf_predict
from .oracle import LandscapeOracle, PoolExhaustedError, expand_candidates

Predictor = Callable[[list[Variant]], np.ndarray]


def stable_seed(words: list[int]) -> int:
    return int(np.random.SeedSequence(words).generate_state(1)[0])


@dataclass
class CampaignContext:
    """Everything a policy may consult while proposing a batch."""

    oracle: LandscapeOracle
    embeddings: EmbeddingStore
    logprobs: LogProbMatrix
    config: "SimConfig"  # noqa: F821 - defined in harness
    seed: int
    measured_rounds: list[list[tuple[Variant, float]]] = field(default_factory=list)

    def __post_init__(self):
        self.rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0x7011]))

    @property
    def reference(self) -> str:
        return self.oracle.dataset.reference_sequence

    def measured_flat(self) -> list[tuple[Variant, float]]:
        return [pair for rnd in self.measured_rounds for pair in rnd]

    def measured_set(self) -> set[Variant]:
        return {v for v, _ in self.measured_flat()}

    def unmeasured_visible(self) -> list[Variant]:
        done = self.measured_set()
        return [v for v in self.oracle.visible if v not in done]

    def visible_singles(self) -> list[Variant]:
        return [v for v in self.oracle.visible if len(v.mutations) == 1]

    def train_seed(self, round_index: int) -> int:
        return stable_seed([self.seed, 0x712A, round_index])


class Policy:
    """A proposal strategy; subclasses may cache state across rounds of one campaign."""

    name = "?"

    def propose(
        self, ctx: CampaignContext, round_index: int
    ) -> tuple[list[Variant], Predictor | None]:
        raise NotImplementedError


def _random_batch(ctx: CampaignContext, n: int) -> list[Variant]:
    pool = ctx.unmeasured_visible()
    n = min(n, len(pool))
    picks = ctx.rng.choice(len(pool), size=n, replace=False)
    return [pool[i] for i in picks]


class RandomPolicy(Policy):
    name = "random"

    def propose(self, ctx, round_index):
        return _random_batch(ctx, ctx.config.batch_size), None


class ZeroShotPolicy(Policy):
    """Successive non-overlapping batches down a fixed naturalness ranking."""

    name = "zero_shot"

    def __init__(self):
        self._ranking: list[Variant] | None = None

    def propose(self, ctx, round_index):
        if self._ranking is None:
            self._ranking = rank_by_naturalness(ctx.oracle.visible, ctx.logprobs)
        done = ctx.measured_set()
        batch = [v for v in self._ranking if v not in done][: ctx.config.batch_size]

        def predictor(variants):
            return np.array([naturalness_score(v, ctx.logprobs) for v in variants])

        return batch, predictor


def _zero_shot_round1(ctx: CampaignContext) -> list[Variant]:
    """First batch from the naturalness ranking of visible single mutants."""
    singles = ctx.visible_singles()
    n = min(ctx.config.batch_size, len(singles))
    if n == 0:
        return []
    return zero_shot_select(singles, ctx.logprobs, n, per_locus_cap=ctx.config.per_locus_cap)


def _candidates(ctx: CampaignContext, round_index: int) -> list[Variant]:
    try:
        return expand_candidates(
            ctx.measured_flat(),
            ctx.reference,
            ctx.oracle.visible,
            round_index,
            top_parents=ctx.config.expansion_parents,
        )
    except PoolExhaustedError:
        return []


class EnsemblePolicy(Policy):
    """Shared machinery for the ranking-ensemble policies.

    round1 is "zero_shot" or "random"; batch_mode is "cl" (constant-liar),
    "ucb" (top-N of mean plus beta*sd), or "mean" (pure exploitation).
    """

    def __init__(self, name: str, round1: str, warm_start: bool, batch_mode: str,
                 loss: str = "bt"):
        self.name = name
        self.round1 = round1
        self.warm_start = warm_start
        self.batch_mode = batch_mode
        self.loss = loss
        self._warm: Ensemble | None = None

    def _warm_started(self, ctx: CampaignContext) -> Ensemble:
        config = MlpConfig(input_dim=ctx.embeddings.dim, seed=0)
        ensemble = Ensemble.create(config, k=ctx.config.ensemble_size,
                                   base_seed=stable_seed([ctx.seed, 0x3EED]))
        if not self.warm_start:
            return ensemble
        targets = warm_start_targets(ctx.reference, ctx.logprobs)
        inputs = ctx.embeddings.matrix([v for v, _ in targets])
        labels = np.array([score for _, score in targets])
        phase = replace(WARM_START_PHASE, max_pairs=ctx.config.max_warm_pairs)
        train_ensemble(ensemble, inputs, labels, phase, base_seed=ctx.train_seed(0))
        return ensemble

    def _trained(self, ctx: CampaignContext, round_index: int) -> Ensemble:
        if self._warm is None:
            self._warm = self._warm_started(ctx)
        ensemble = self._warm.clone()
        measured = ctx.measured_flat()
        inputs = ctx.embeddings.matrix([v for v, _ in measured])
        labels = np.array([a for _, a in measured])
        train_ensemble(
            ensemble, inputs, labels, ACTIVITY_PHASE,
            base_seed=ctx.train_seed(round_index), loss=self.loss,
        )
        return ensemble

    def _consensus_and_cov(self, ensemble: Ensemble, inputs: np.ndarray):
        if self.loss == "mse":
            member = ensemble.member_predictions(inputs)
            consensus = member.mean(axis=0)
            centered = member - consensus
            cov = centered.T @ centered / max(ensemble.k - 1, 1)
            return consensus, (cov + cov.T) / 2.0
        return predict_consensus_and_covariance(ensemble, inputs)

    def propose(self, ctx, round_index):
        if round_index == 1:
            if self.round1 == "zero_shot":
                return _zero_shot_round1(ctx), None
            return _random_batch(ctx, ctx.config.batch_size), None

        ensemble = self._trained(ctx, round_index)
        candidates = _candidates(ctx, round_index)

        def predictor(variants):
            return self._consensus_and_cov(ensemble, ctx.embeddings.matrix(variants))[0]

        if not candidates:
            return [], predictor
        mean, cov = self._consensus_and_cov(ensemble, ctx.embeddings.matrix(candidates))
        n = min(ctx.config.batch_size, len(candidates))
        if self.batch_mode == "cl":
            alpha = ctx.config.alpha_for_round(round_index)
            picks = constant_liar_select(mean, cov, n, alpha, beta=ctx.config.ucb_beta)
        elif self.batch_mode == "ucb":
            picks = top_n_select(ucb_score(mean, cov, ctx.config.ucb_beta), n)
        elif self.batch_mode == "mean":
            picks = top_n_select(mean, n)
        else:
            raise ValueError(f"unknown batch_mode {self.batch_mode!r}")
        return [candidates[i] for i in picks], predictor


class RandomForestPolicy(Policy):
    """Random first round, then a regression forest on embeddings with top-N picks."""

    name = "random_forest"

    def propose(self, ctx, round_index):
        if round_index == 1:
            return _random_batch(ctx, ctx.config.batch_size), None
        measured = ctx.measured_flat()
        inputs = ctx.embeddings.matrix([v for v, _ in measured])
        labels = np.array([a for _, a in measured])
        forest = rf_fit(
            inputs, labels,
            n_trees=ctx.config.rf_trees,
            max_features_fraction=ctx.config.rf_feature_fraction,
            seed=ctx.train_seed(round_index),
        )

        def predictor(variants):
            return rf_predict(forest, ctx.embeddings.matrix(variants))

        candidates = _candidates(ctx, round_index)
        if not candidates:
            return [], predictor
        scores = rf_predict(forest, ctx.embeddings.matrix(candidates))
        picks = top_n_select(scores, min(ctx.config.batch_size, len(candidates)))
        return [candidates[i] for i in picks], predictor


def make_policy(name: str) -> Policy:
    if name == "random":
        return RandomPolicy()
    if name == "zero_shot":
        return ZeroShotPolicy()
    if name == "random_forest":
        return RandomForestPolicy()
    if name == "folde":
        return EnsemblePolicy("folde", round1="zero_shot", warm_start=True, batch_mode="cl")
    if name == "folde_no_warmstart":
        return EnsemblePolicy(
            "folde_no_warmstart", round1="zero_shot", warm_start=False, batch_mode="cl"
        )
    if name == "folde_no_cl":
        return EnsemblePolicy("folde_no_cl", round1="zero_shot", warm_start=True,
                              batch_mode="ucb")
    if name == "ucb_topn":
        return EnsemblePolicy("ucb_topn", round1="random", warm_start=False,
                              batch_mode="ucb")
    if name == "mse_net":
        return EnsemblePolicy("mse_net", round1="random", warm_start=False,
                              batch_mode="mean", loss="mse")
    raise ValueError(f"unknown policy {name!r}")


POLICY_NAMES = (
    "random",
    "zero_shot",
    "random_forest",
    "folde",
    "folde_no_warmstart",
    "folde_no_cl",
    "ucb_topn",
    "mse_net",
)
