"""Live campaign state: persistence, proposal, and measurement recording.

One JSON state file per campaign, written atomically (temp file + rename) with
the proposal persisted before it is served, so a crash between propose and
record leaves a recoverable file. A sidecar lock serializes writers.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from filelock import FileLock

from ..core import (
    Dataset,
    EmbeddingStore,
    LogProbMatrix,
    Variant,
    all_single_mutants,
    load_dataset,
    load_embeddings,
    load_logprobs,
    parse_variant,
    validate_reference,
)
from ..ranker import (
    ACTIVITY_PHASE,
    WARM_START_PHASE,
    Ensemble,
    MlpConfig,
    predict_consensus_and_covariance,
    train_ensemble,
    warm_start_targets,
)
from ..selector import constant_liar_select, ucb_score
from ..sim.metrics import batch_loci_diversity, top_decile_hits, top_percentile_success
from ..sim.oracle import single_mutation_neighbors
from ..sim.policies import stable_seed
from ..zeroshot import naturalness_score, zero_shot_select
from dataclasses import replace as dc_replace

STATE_VERSION = 1

STATUS_READY = "ready_to_propose"
STATUS_AWAITING = "awaiting_measurements"
STATUS_COMPLETE = "complete"

_ID_PATTERN = re.compile(r"^[A-Za-z0-9._-]{1,64}$")


class CampaignError(RuntimeError):
    """Domain-rule violation (bad transition, unknown variant, missing artifact)."""


@dataclass
class CampaignConfig:
    batch_size: int = 16
    rounds: int = 3
    alpha_schedule: list[float] = field(default_factory=lambda: [6.0, 100.0])
    per_locus_cap: int | None = 3
    seed: int = 0
    ensemble_size: int = 5
    ucb_beta: float = 1.0
    expansion_parents: int = 4
    max_warm_pairs: int = 40000
    warm_start: bool = True

    def alpha_for_round(self, round_index: int) -> float:
        return self.alpha_schedule[min(round_index - 2, len(self.alpha_schedule) - 1)]


@dataclass
class CampaignRound:
    index: int
    proposed: list[str]  # variant notation, in selection order
    scores: dict[str, dict]  # per-variant naturalness / consensus / ucb
    measurements: dict[str, float] = field(default_factory=dict)
    failed: list[str] = field(default_factory=list)


@dataclass
class CampaignState:
    campaign_id: str
    reference: str
    embeddings_path: str
    logprobs_path: str
    config: CampaignConfig
    dataset_path: str | None = None  # optional ground truth for replay metrics
    rounds: list[CampaignRound] = field(default_factory=list)
    status: str = STATUS_READY
    version: int = STATE_VERSION

    def __post_init__(self):
        if not _ID_PATTERN.match(self.campaign_id):
            raise CampaignError(f"invalid campaign id {self.campaign_id!r}")
        self.reference = validate_reference(self.reference)

    def measured_pairs(self) -> list[tuple[Variant, float]]:
        out = []
        for rnd in self.rounds:
            for text, activity in rnd.measurements.items():
                out.append((parse_variant(text, self.reference), float(activity)))
        return out

    def proposed_or_failed(self) -> set[Variant]:
        out = set()
        for rnd in self.rounds:
            for text in rnd.proposed:
                out.add(parse_variant(text, self.reference))
        return out


def state_to_json(state: CampaignState) -> dict:
    return asdict(state)


def state_from_json(data: dict) -> CampaignState:
    config = CampaignConfig(**data["config"])
    rounds = [CampaignRound(**r) for r in data.get("rounds", [])]
    return CampaignState(
        campaign_id=data["campaign_id"],
        reference=data["reference"],
        embeddings_path=data["embeddings_path"],
        logprobs_path=data["logprobs_path"],
        config=config,
        dataset_path=data.get("dataset_path"),
        rounds=rounds,
        status=data["status"],
        version=data.get("version", STATE_VERSION),
    )


class CampaignStore:
    """Directory of campaign state files with atomic writes and per-id locks."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def path(self, campaign_id: str) -> Path:
        if not _ID_PATTERN.match(campaign_id):
            raise CampaignError(f"invalid campaign id {campaign_id!r}")
        return self.data_dir / f"{campaign_id}.json"

    def lock(self, campaign_id: str) -> FileLock:
        return FileLock(str(self.path(campaign_id)) + ".lock")

    def exists(self, campaign_id: str) -> bool:
        return self.path(campaign_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.json"))

    def load(self, campaign_id: str) -> CampaignState:
        path = self.path(campaign_id)
        if not path.exists():
            raise KeyError(f"no campaign {campaign_id!r}")
        with open(path, encoding="utf-8") as fh:
            return state_from_json(json.load(fh))

    def save(self, state: CampaignState) -> None:
        path = self.path(state.campaign_id)
        payload = json.dumps(state_to_json(state), indent=2, sort_keys=True)
        fd, tmp = tempfile.mkstemp(dir=self.data_dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def create(self, state: CampaignState) -> CampaignState:
        with self.lock(state.campaign_id):
            if self.exists(state.campaign_id):
                raise CampaignError(f"campaign {state.campaign_id!r} already exists")
            self.save(state)
        return state


@dataclass
class Artifacts:
    embeddings: EmbeddingStore
    logprobs: LogProbMatrix
    dataset: Dataset | None = None


def load_artifacts(state: CampaignState) -> Artifacts:
    try:
        embeddings = load_embeddings(state.embeddings_path)
        logprobs = load_logprobs(state.logprobs_path, reference=state.reference)
    except FileNotFoundError as exc:
        raise CampaignError(f"missing artifact: {exc}") from exc
    dataset = None
    if state.dataset_path:
        try:
            dataset = load_dataset(state.dataset_path)
        except FileNotFoundError as exc:
            raise CampaignError(f"missing artifact: {exc}") from exc
    return Artifacts(embeddings=embeddings, logprobs=logprobs, dataset=dataset)


def _train_seed(state: CampaignState, tag: int) -> int:
    return stable_seed([state.config.seed, tag, len(state.rounds)])


def _score_entry(naturalness, consensus=None, ucb=None) -> dict:
    return {
        "naturalness": float(naturalness),
        "consensus": None if consensus is None else float(consensus),
        "ucb": None if ucb is None else float(ucb),
    }


def compute_proposal(state: CampaignState, artifacts: Artifacts, alpha: float | None = None):
    """Next batch plus per-variant scores; pure function of state and artifacts."""
    config = state.config
    reference = state.reference
    round_index = len(state.rounds) + 1
    excluded = state.proposed_or_failed()

    if round_index == 1:
        candidates = [
            v for v in all_single_mutants(reference) if v in artifacts.embeddings
        ]
        if len(candidates) < config.batch_size:
            raise CampaignError(
                f"embedding store covers only {len(candidates)} single mutants; "
                f"cannot propose a batch of {config.batch_size}"
            )
        batch = zero_shot_select(
            candidates, artifacts.logprobs, config.batch_size,
            per_locus_cap=config.per_locus_cap,
        )
        scores = {
            v.render(): _score_entry(naturalness_score(v, artifacts.logprobs, reference))
            for v in batch
        }
        return batch, scores

    measured = state.measured_pairs()
    if len(measured) < 2:
        raise CampaignError("need at least 2 measured variants to train")
    labels = np.array([a for _, a in measured])
    if len(np.unique(labels)) < 2:
        raise CampaignError("all measured activities are equal; ranking is undefined")

    mlp_config = MlpConfig(input_dim=artifacts.embeddings.dim, seed=0)
    ensemble = Ensemble.create(
        mlp_config, k=config.ensemble_size, base_seed=stable_seed([config.seed, 0x3EED])
    )
    if config.warm_start:
        targets = warm_start_targets(reference, artifacts.logprobs)
        warm_inputs = artifacts.embeddings.matrix([v for v, _ in targets])
        warm_labels = np.array([s for _, s in targets])
        phase = dc_replace(WARM_START_PHASE, max_pairs=config.max_warm_pairs)
        train_ensemble(
            ensemble, warm_inputs, warm_labels, phase,
            base_seed=stable_seed([config.seed, 0x712A, 0]),
        )
    inputs = artifacts.embeddings.matrix([v for v, _ in measured])
    train_ensemble(
        ensemble, inputs, labels, ACTIVITY_PHASE,
        base_seed=_train_seed(state, 0x712A),
    )

    parents = [Variant()] + [
        v for v, _ in sorted(measured, key=lambda va: -va[1])[: config.expansion_parents]
    ]
    neighborhood: set[Variant] = set()
    for parent in parents:
        neighborhood.update(single_mutation_neighbors(parent, reference))
    candidates = [
        v for v in sorted(neighborhood, key=lambda v: v.sort_key())
        if v in artifacts.embeddings and v not in excluded
    ]
    if not candidates:
        raise CampaignError("candidate pool exhausted")

    mean, cov = predict_consensus_and_covariance(
        ensemble, artifacts.embeddings.matrix(candidates)
    )
    n = min(config.batch_size, len(candidates))
    effective_alpha = config.alpha_for_round(round_index) if alpha is None else float(alpha)
    picks = constant_liar_select(mean, cov, n, effective_alpha, beta=config.ucb_beta)
    ucb = ucb_score(mean, cov, config.ucb_beta)
    batch = [candidates[i] for i in picks]
    scores = {
        candidates[i].render(): _score_entry(
            naturalness_score(candidates[i], artifacts.logprobs, reference),
            consensus=mean[i],
            ucb=ucb[i],
        )
        for i in picks
    }
    return batch, scores


def propose_batch(
    store: CampaignStore, campaign_id: str, alpha: float | None = None
) -> CampaignState:
    """Compute, persist (write-ahead), and return the next proposal."""
    with store.lock(campaign_id):
        state = store.load(campaign_id)
        if state.status != STATUS_READY:
            raise CampaignError(
                f"cannot propose while status is {state.status!r}"
            )
        artifacts = load_artifacts(state)
        batch, scores = compute_proposal(state, artifacts, alpha=alpha)
        state.rounds.append(
            CampaignRound(
                index=len(state.rounds) + 1,
                proposed=[v.render() for v in batch],
                scores=scores,
            )
        )
        state.status = STATUS_AWAITING
        store.save(state)
    return state


def record_measurements(
    store: CampaignStore, campaign_id: str, measurements: list[tuple[str, float]]
) -> CampaignState:
    """Attach activities to the pending batch; absent variants are marked failed."""
    with store.lock(campaign_id):
        state = store.load(campaign_id)
        if state.status != STATUS_AWAITING:
            raise CampaignError(f"no pending batch (status {state.status!r})")
        rnd = state.rounds[-1]
        pending = {
            parse_variant(t, state.reference): t for t in rnd.proposed
        }
        seen: set[Variant] = set()
        for text, activity in measurements:
            variant = parse_variant(text, state.reference)
            if variant not in pending:
                raise CampaignError(f"variant {text!r} is not in the proposed batch")
            if variant in seen:
                raise CampaignError(f"duplicate submission for {text!r}")
            seen.add(variant)
            if not np.isfinite(activity):
                raise CampaignError(f"non-finite activity for {text!r}")
            rnd.measurements[pending[variant]] = float(activity)
        rnd.failed = [t for v, t in pending.items() if v not in seen]
        state.status = (
            STATUS_COMPLETE if len(state.rounds) >= state.config.rounds else STATUS_READY
        )
        store.save(state)
    return state


def campaign_metrics(state: CampaignState, artifacts: Artifacts | None = None) -> dict:
    """Per-round summary for dashboards; hit metrics appear when ground truth is attached."""
    if artifacts is None:
        artifacts = load_artifacts(state)
    reference = state.reference
    rounds_out = []
    history: list[list[Variant]] = []
    best = None
    cum_hits = 0
    success = False
    for rnd in state.rounds:
        batch = [parse_variant(t, reference) for t in rnd.proposed]
        unique_loci, new_loci = batch_loci_diversity(batch, history)
        history.append(batch)
        measured = [float(a) for a in rnd.measurements.values()]
        if measured:
            best = max(measured) if best is None else max(best, max(measured))
        entry = {
            "round": rnd.index,
            "proposed": len(rnd.proposed),
            "measured": len(rnd.measurements),
            "failed": len(rnd.failed),
            "unique_loci": unique_loci,
            "new_loci": new_loci,
            "best_activity": max(measured) if measured else None,
            "mean_activity": float(np.mean(measured)) if measured else None,
            "best_activity_so_far": best,
            "cum_top_decile_hits": None,
            "top_percentile_success_so_far": None,
        }
        if artifacts.dataset is not None:
            known = [
                parse_variant(t, reference)
                for t in rnd.measurements
                if parse_variant(t, reference) in artifacts.dataset.activity_map()
            ]
            cum_hits += top_decile_hits(known, artifacts.dataset)
            success = success or top_percentile_success(known, artifacts.dataset)
            entry["cum_top_decile_hits"] = cum_hits
            entry["top_percentile_success_so_far"] = success
        rounds_out.append(entry)
    return {
        "campaign_id": state.campaign_id,
        "status": state.status,
        "rounds": rounds_out,
    }


def summarize(state: CampaignState) -> dict:
    return {
        "campaign_id": state.campaign_id,
        "status": state.status,
        "reference_length": len(state.reference),
        "rounds_completed": sum(1 for r in state.rounds if r.measurements or r.failed),
        "rounds_proposed": len(state.rounds),
        "batch_size": state.config.batch_size,
        "max_rounds": state.config.rounds,
    }
