"""Seed-deterministic synthetic fitness landscapes with calibrated naturalness.

A landscape is additive per-site effects plus optional sparse pairwise
epistasis plus Gaussian measurement noise. The log-probability matrix is a
mixture of the true effect signal and independent noise, with the mixture
weight bisected until the naturalness-activity Spearman over the dataset's
single mutants lands on the requested target. Embeddings are a fixed random
linear map of mutation indicator vectors plus per-variant noise, so related
variants get related embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import (
    ALPHABET,
    AA_INDEX,
    Dataset,
    EmbeddingStore,
    LogProbMatrix,
    Mutation,
    Variant,
    all_single_mutants,
)
from .metrics import spearman


class CalibrationError(RuntimeError):
    """Naturalness calibration failed to reach the target within its iteration budget."""


@dataclass(frozen=True)
class SynthConfig:
    length: int
    n_variants: int
    epistasis_strength: float = 0.0
    naturalness_rho_target: float = 0.48
    rho_tolerance: float = 0.05
    embed_dim: int = 128
    n_doubles: int = 0  # doubles included inside n_variants
    activity_noise: float = 0.1  # fraction of the noiseless activity spread
    embedding_noise: float = 0.25
    site_tail: float = 0.0  # >0 concentrates large effects on few positions
    position_shift: float = 0.0  # per-position mean effect (tolerant vs critical sites)
    seed: int = 0

    def __post_init__(self):
        if self.length < 2 or self.n_variants < 2 or self.embed_dim < 1:
            raise ValueError("length, n_variants and embed_dim must be positive")
        if self.n_doubles < 0 or self.n_doubles > self.n_variants:
            raise ValueError("n_doubles must fit inside n_variants")
        n_singles = self.n_variants - self.n_doubles
        if n_singles > 19 * self.length:
            raise ValueError(
                f"{n_singles} singles requested but only {19 * self.length} exist"
            )


@dataclass
class SynthMeta:
    reference: str
    effects: np.ndarray  # (L, 20); reference letters are exactly 0
    couplings: list[tuple[int, int, float]]  # 1-based position pairs
    site_units: np.ndarray  # (L, 20) factors entering epistatic terms
    mix_weight: float
    achieved_rho: float
    config: SynthConfig

    def base_activity(self, variant: Variant) -> float:
        """Noiseless activity: additive effects plus epistatic couplings."""
        total = sum(
            float(self.effects[m.position - 1, AA_INDEX[m.to_aa]])
            for m in variant.mutations
        )
        mutated = {m.position: AA_INDEX[m.to_aa] for m in variant.mutations}
        for p, q, c in self.couplings:
            if p in mutated and q in mutated:
                total += c * float(
                    self.site_units[p - 1, mutated[p]] * self.site_units[q - 1, mutated[q]]
                )
        return total


@dataclass
class SynthLandscape:
    dataset: Dataset
    embeddings: EmbeddingStore
    logprobs: LogProbMatrix
    meta: SynthMeta


def _variant_noise(config: SynthConfig, variant: Variant, tag: int, size: int) -> np.ndarray:
    """Per-variant Gaussian noise from a stream keyed by the variant itself."""
    words = [config.seed, tag]
    for m in variant.mutations:
        words.append(m.position * 32 + AA_INDEX[m.to_aa])
    rng = np.random.default_rng(np.random.SeedSequence(words))
    return rng.standard_normal(size)


def _sample_doubles(rng, reference: str, count: int) -> list[Variant]:
    length = len(reference)
    seen = set()
    doubles = []
    limit = count * 200 + 1000
    attempts = 0
    while len(doubles) < count:
        attempts += 1
        if attempts > limit:
            raise ValueError(f"could not sample {count} distinct double mutants")
        p, q = sorted(rng.choice(length, size=2, replace=False) + 1)
        aa_p = ALPHABET[rng.integers(0, 20)]
        aa_q = ALPHABET[rng.integers(0, 20)]
        if aa_p == reference[p - 1] or aa_q == reference[q - 1]:
            continue
        variant = Variant(
            (Mutation(int(p), reference[p - 1], aa_p), Mutation(int(q), reference[q - 1], aa_q))
        )
        if variant in seen:
            continue
        seen.add(variant)
        doubles.append(variant)
    return doubles


def _standardize_offref(matrix: np.ndarray, ref_cols: np.ndarray) -> np.ndarray:
    """Zero-mean unit-std over non-reference entries; reference entries stay 0."""
    out = matrix.copy()
    mask = np.ones_like(out, dtype=bool)
    mask[np.arange(out.shape[0]), ref_cols] = False
    vals = out[mask]
    out[mask] = (vals - vals.mean()) / vals.std()
    out[~mask] = 0.0
    return out


def _log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
    return logits - lse


MAX_CALIBRATION_ITERS = 60


def synth_landscape(config: SynthConfig) -> SynthLandscape:
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x1A5D]))
    reference = "".join(ALPHABET[i] for i in rng.integers(0, 20, size=config.length))
    ref_cols = np.array([AA_INDEX[aa] for aa in reference])

    effects = rng.standard_normal((config.length, 20))
    if config.site_tail > 0:
        site_scale = np.exp(config.site_tail * rng.standard_normal(config.length))
        effects *= (site_scale / site_scale.mean())[:, None]
    if config.position_shift > 0:
        effects += config.position_shift * rng.standard_normal((config.length, 1))
    effects[np.arange(config.length), ref_cols] = 0.0

    site_units = rng.standard_normal((config.length, 20))
    couplings: list[tuple[int, int, float]] = []
    if config.epistasis_strength > 0:
        n_pairs = min(2 * config.length, config.length * (config.length - 1) // 2)
        pairs = set()
        while len(pairs) < n_pairs:
            p, q = sorted(rng.choice(config.length, size=2, replace=False) + 1)
            pairs.add((int(p), int(q)))
        for p, q in sorted(pairs):
            couplings.append((p, q, config.epistasis_strength * rng.standard_normal()))

    meta = SynthMeta(
        reference=reference,
        effects=effects,
        couplings=couplings,
        site_units=site_units,
        mix_weight=0.0,
        achieved_rho=0.0,
        config=config,
    )

    singles_all = all_single_mutants(reference)
    n_singles = config.n_variants - config.n_doubles
    chosen = rng.choice(len(singles_all), size=n_singles, replace=False)
    variants = [singles_all[i] for i in chosen]
    if config.n_doubles:
        variants += _sample_doubles(rng, reference, config.n_doubles)

    base = np.array([meta.base_activity(v) for v in variants])
    noise_sd = config.activity_noise * (base.std() if base.std() > 0 else 1.0)
    activities = base + noise_sd * rng.standard_normal(len(base))
    dataset = Dataset(reference, list(zip(variants, [float(a) for a in activities])))

    # calibrate the log-prob mixture so singles' naturalness hits the target rho
    signal = _standardize_offref(effects, ref_cols)
    distractor = _standardize_offref(rng.standard_normal((config.length, 20)), ref_cols)
    single_rows = [
        (i, v.mutations[0]) for i, v in enumerate(variants) if len(v.mutations) == 1
    ]
    if len(single_rows) < 8:
        raise CalibrationError("too few single mutants in the dataset to calibrate against")
    idx = np.array([(m.position - 1, AA_INDEX[m.to_aa]) for _, m in single_rows])
    acts = activities[[i for i, _ in single_rows]]
    sig_vals = signal[idx[:, 0], idx[:, 1]]
    dis_vals = distractor[idx[:, 0], idx[:, 1]]

    lo, hi = 0.0, 1.0
    weight = 0.5
    achieved = None
    for _ in range(MAX_CALIBRATION_ITERS):
        weight = (lo + hi) / 2.0
        achieved = spearman(weight * sig_vals + (1.0 - weight) * dis_vals, acts)
        if abs(achieved - config.naturalness_rho_target) <= config.rho_tolerance / 2.0:
            break
        if achieved < config.naturalness_rho_target:
            lo = weight
        else:
            hi = weight
    if achieved is None or abs(achieved - config.naturalness_rho_target) > config.rho_tolerance:
        raise CalibrationError(
            f"reached rho={achieved} after {MAX_CALIBRATION_ITERS} iterations "
            f"(target {config.naturalness_rho_target} +/- {config.rho_tolerance})"
        )
    meta.mix_weight = weight
    meta.achieved_rho = achieved
    logprobs = LogProbMatrix(
        _log_softmax_rows(weight * signal + (1.0 - weight) * distractor)
    )

    # embeddings: fixed linear map of mutation indicators, plus per-variant
    # noise; the indicator carries a per-substitution block and a per-position
    # block, so mutants at a shared locus get related embeddings
    projection = rng.standard_normal((config.length * 20, config.embed_dim))
    position_projection = rng.standard_normal((config.length, config.embed_dim))
    store = EmbeddingStore(dim=config.embed_dim)
    covered: set[Variant] = set()
    for v in [Variant()] + singles_all + variants:
        if v in covered:
            continue
        covered.add(v)
        vec = np.zeros(config.embed_dim)
        for m in v.mutations:
            vec += projection[(m.position - 1) * 20 + AA_INDEX[m.to_aa]]
            vec += position_projection[m.position - 1]
        vec += config.embedding_noise * _variant_noise(config, v, 0xE4B, config.embed_dim)
        store.add(v, vec.astype(np.float32))

    return SynthLandscape(dataset=dataset, embeddings=store, logprobs=logprobs, meta=meta)
