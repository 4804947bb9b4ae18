"""Iterative benchmark harness: run campaigns, aggregate metrics, write results files.

A results file holds one tab-separated row per (policy, replicate, round).
Replicates may run in parallel worker processes; every random stream is keyed
by (seed, policy, replicate), so scheduling cannot change the output bytes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import Dataset, EmbeddingStore, LogProbMatrix, Variant
from ..zeroshot import rank_by_naturalness
from .landscape import SynthLandscape
from .metrics import (
    batch_loci_diversity,
    spearman,
    top_decile_hits,
    top_percentile_success,
)
from .oracle import LandscapeOracle
from .policies import POLICY_NAMES, CampaignContext, make_policy, stable_seed


@dataclass(frozen=True)
class SimConfig:
    rounds: int = 3
    batch_size: int = 16
    replicates: int = 20
    policy: str = "folde"
    alpha_schedule: tuple[float, ...] = (6.0, 100.0)
    seed: int = 0
    per_locus_cap: int | None = None  # live campaigns set this; simulations don't
    ensemble_size: int = 5
    ucb_beta: float = 1.0
    expansion_parents: int = 4
    max_warm_pairs: int = 40000
    holdout_fraction: float = 0.5
    rf_trees: int = 100
    rf_feature_fraction: float = 1.0 / 3.0

    def __post_init__(self):
        if self.rounds < 1 or self.batch_size < 1 or self.replicates < 1:
            raise ValueError("rounds, batch_size and replicates must be >= 1")
        if self.policy not in POLICY_NAMES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if not self.alpha_schedule:
            raise ValueError("alpha_schedule must name at least one round")
        object.__setattr__(self, "alpha_schedule", tuple(self.alpha_schedule))

    def alpha_for_round(self, round_index: int) -> float:
        """Alpha for a constant-liar round; the last schedule entry repeats."""
        if round_index < 2:
            raise ValueError("constant-liar applies from round 2 onward")
        return self.alpha_schedule[min(round_index - 2, len(self.alpha_schedule) - 1)]


@dataclass
class RoundRecord:
    round_index: int
    batch: list[Variant]
    activities: list[float]
    heldout_spearman: float | None
    unique_loci: int
    new_loci: int
    round_hits: int
    cum_hits: int
    success_so_far: bool


@dataclass
class MetricsReport:
    cumulative_top_decile_hits: list[int] = field(default_factory=list)
    top_percentile_success: bool = False


def _fill_batch(batch: list[Variant], ctx: CampaignContext, n: int) -> list[Variant]:
    """Top up a short batch from the naturalness ranking of the unmeasured pool."""
    if len(batch) >= n:
        return batch[:n]
    have = set(batch) | ctx.measured_set()
    extras = [v for v in rank_by_naturalness(ctx.oracle.visible, ctx.logprobs) if v not in have]
    return batch + extras[: n - len(batch)]


def run_campaign(
    oracle: LandscapeOracle,
    config: SimConfig,
    embeddings: EmbeddingStore,
    logprobs: LogProbMatrix,
    seed: int | None = None,
) -> tuple[list[RoundRecord], MetricsReport]:
    """One campaign: per-round proposal, measurement, and metric bookkeeping."""
    if len(oracle.visible) < config.rounds * config.batch_size:
        raise ValueError(
            f"visible pool of {len(oracle.visible)} cannot supply "
            f"{config.rounds} rounds of {config.batch_size}"
        )
    ctx = CampaignContext(
        oracle=oracle,
        embeddings=embeddings,
        logprobs=logprobs,
        config=config,
        seed=config.seed if seed is None else seed,
    )
    policy = make_policy(config.policy)
    records: list[RoundRecord] = []
    selected: list[Variant] = []
    cum_hits = 0
    success = False
    for round_index in range(1, config.rounds + 1):
        batch, predictor = policy.propose(ctx, round_index)
        n = min(config.batch_size, len(ctx.unmeasured_visible()))
        batch = _fill_batch(batch, ctx, n)
        measured_before = ctx.measured_set()
        if len(set(batch)) != len(batch):
            raise RuntimeError(f"{config.policy} proposed duplicate variants")
        for v in batch:
            if v in measured_before:
                raise RuntimeError(f"{config.policy} re-proposed measured variant {v}")
        activities = [ctx.oracle.activity(v) for v in batch]

        rho = None
        if predictor is not None and len(oracle.holdout) >= 2:
            try:
                rho = spearman(predictor(oracle.holdout), oracle.holdout_activities())
            except ValueError:
                rho = None
        unique_loci, new_loci = batch_loci_diversity(batch, [r.batch for r in records])
        round_hits = top_decile_hits(batch, oracle.dataset)
        cum_hits += round_hits
        selected.extend(batch)
        success = success or top_percentile_success(batch, oracle.dataset)
        records.append(
            RoundRecord(
                round_index=round_index,
                batch=batch,
                activities=activities,
                heldout_spearman=rho,
                unique_loci=unique_loci,
                new_loci=new_loci,
                round_hits=round_hits,
                cum_hits=cum_hits,
                success_so_far=success,
            )
        )
        ctx.measured_rounds.append(list(zip(batch, activities)))
    report = MetricsReport(
        cumulative_top_decile_hits=[r.cum_hits for r in records],
        top_percentile_success=success,
    )
    return records, report


def run_replicate(
    dataset: Dataset,
    embeddings: EmbeddingStore,
    logprobs: LogProbMatrix,
    config: SimConfig,
    policy: str,
    replicate: int,
) -> list[RoundRecord]:
    """One (policy, replicate) campaign with paired holdout splits across policies."""
    oracle = LandscapeOracle.split(
        dataset, stable_seed([config.seed, 0x5B17, replicate]), config.holdout_fraction
    )
    campaign_seed = stable_seed([config.seed, POLICY_NAMES.index(policy), replicate])
    records, _ = run_campaign(
        oracle, replace(config, policy=policy), embeddings, logprobs, seed=campaign_seed
    )
    return records


RESULT_COLUMNS = (
    "policy",
    "replicate",
    "round",
    "batch_size",
    "round_hits",
    "cum_hits",
    "top1_success_so_far",
    "heldout_spearman",
    "unique_loci",
    "new_loci",
    "best_activity_so_far",
)


def _records_to_rows(policy: str, replicate: int, records: list[RoundRecord]) -> list[dict]:
    rows = []
    best = -np.inf
    for r in records:
        if r.activities:
            best = max(best, max(r.activities))
        rows.append(
            {
                "policy": policy,
                "replicate": replicate,
                "round": r.round_index,
                "batch_size": len(r.batch),
                "round_hits": r.round_hits,
                "cum_hits": r.cum_hits,
                "top1_success_so_far": int(r.success_so_far),
                "heldout_spearman": r.heldout_spearman,
                "unique_loci": r.unique_loci,
                "new_loci": r.new_loci,
                "best_activity_so_far": float(best),
            }
        )
    return rows


def _one_job(args) -> tuple[str, int, list[dict]]:
    dataset, embeddings, logprobs, config, policy, replicate = args
    records = run_replicate(dataset, embeddings, logprobs, config, policy, replicate)
    return policy, replicate, _records_to_rows(policy, replicate, records)


def run_benchmark(
    landscape: SynthLandscape,
    config: SimConfig,
    policies: tuple[str, ...] | None = None,
    workers: int = 1,
) -> list[dict]:
    """All (policy, replicate) campaigns; rows come back in a canonical order."""
    policies = tuple(policies or (config.policy,))
    for p in policies:
        if p not in POLICY_NAMES:
            raise ValueError(f"unknown policy {p!r}")
    jobs = [
        (landscape.dataset, landscape.embeddings, landscape.logprobs, config, p, r)
        for p in policies
        for r in range(config.replicates)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_one_job, jobs))
    else:
        outputs = [_one_job(j) for j in jobs]
    outputs.sort(key=lambda out: (policies.index(out[0]), out[1]))
    return [row for _, _, rows in outputs for row in rows]


def format_value(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(RESULT_COLUMNS) + "\n")
        for row in rows:
            fh.write("\t".join(format_value(row[c]) for c in RESULT_COLUMNS) + "\n")


def read_results(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or tuple(lines[0].split("\t")) != RESULT_COLUMNS:
        raise ValueError(f"{path}: missing results header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split("\t")
        row = dict(zip(RESULT_COLUMNS, parts))
        for key in ("replicate", "round", "batch_size", "round_hits", "cum_hits",
                    "top1_success_so_far", "unique_loci", "new_loci"):
            row[key] = int(row[key])
        for key in ("heldout_spearman", "best_activity_so_far"):
            row[key] = None if row[key] == "NA" else float(row[key])
        rows.append(row)
    return rows


def aggregate_results(rows: list[dict]) -> list[dict]:
    """Per (policy, round) means used by the report command and the UI charts."""
    groups: dict[tuple[str, int], list[dict]] = {}
    order: list[tuple[str, int]] = []
    for row in rows:
        key = (row["policy"], row["round"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for policy, round_index in order:
        grp = groups[(policy, round_index)]
        hits = np.array([g["cum_hits"] for g in grp], dtype=np.float64)
        succ = np.array([g["top1_success_so_far"] for g in grp], dtype=np.float64)
        rhos = [g["heldout_spearman"] for g in grp if g["heldout_spearman"] is not None]
        loci = np.array([g["unique_loci"] for g in grp], dtype=np.float64)
        new = np.array([g["new_loci"] for g in grp], dtype=np.float64)
        out.append(
            {
                "policy": policy,
                "round": round_index,
                "replicates": len(grp),
                "mean_cum_hits": float(hits.mean()),
                "sem_cum_hits": float(hits.std(ddof=1) / np.sqrt(len(hits))) if len(hits) > 1 else 0.0,
                "top1_probability": float(succ.mean()),
                "mean_heldout_spearman": float(np.mean(rhos)) if rhos else None,
                "mean_unique_loci": float(loci.mean()),
                "mean_new_loci": float(new.mean()),
            }
        )
    return out
