"""Simulation benchmark harness: landscapes, oracles, policies, metrics, statistics."""

from .forest import RandomForest, rf_fit, rf_predict
from .harness import (
    MetricsReport,
    RoundRecord,
    SimConfig,
    aggregate_results,
    read_results,
    run_benchmark,
    run_campaign,
    run_replicate,
    write_results,
)
from .landscape import CalibrationError, SynthConfig, SynthLandscape, synth_landscape
from .metrics import (
    average_ranks,
    batch_loci_diversity,
    difficulty,
    spearman,
    top_decile_hits,
    top_percentile_success,
)
from .oracle import (
    LandscapeOracle,
    PoolExhaustedError,
    expand_candidates,
    single_mutation_neighbors,
)
from .policies import POLICY_NAMES, CampaignContext, make_policy, stable_seed
from .stats import wilcoxon_one_sided

__all__ = [
    "CalibrationError",
    "CampaignContext",
    "LandscapeOracle",
    "MetricsReport",
    "POLICY_NAMES",
    "PoolExhaustedError",
    "RandomForest",
    "RoundRecord",
    "SimConfig",
    "SynthConfig",
    "SynthLandscape",
    "aggregate_results",
    "average_ranks",
    "batch_loci_diversity",
    "difficulty",
    "expand_candidates",
    "make_policy",
    "read_results",
    "rf_fit",
    "rf_predict",
    "run_benchmark",
    "run_campaign",
    "run_replicate",
    "single_mutation_neighbors",
    "spearman",
    "stable_seed",
    "synth_landscape",
    "top_decile_hits",
    "top_percentile_success",
    "wilcoxon_one_sided",
    "write_results",
]
