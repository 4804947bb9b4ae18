"""Seed-diverse ensembles: consensus scores and cross-model covariance.

Pair-loss training fixes only score differences, so each member's prediction
vector is de-meaned before members are combined; the spread that survives
de-meaning is what the covariance reports.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .mlp import ENSEMBLE_MAGIC, MlpConfig, MlpModel, _model_from_bytes, _model_to_bytes
from .pairs import PairSet, enumerate_pairs, split_pairs, subsample_pairs
from .training import TrainPhaseConfig, train_model

DEFAULT_ENSEMBLE_SIZE = 5


def member_seed(base_seed: int, index: int) -> int:
    """Private, stable stream per (base seed, member index)."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


@dataclass
class Ensemble:
    members: list[MlpModel]

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least 1 member")

    @property
    def k(self) -> int:
        return len(self.members)

    @classmethod
    def create(
        cls, config: MlpConfig, k: int = DEFAULT_ENSEMBLE_SIZE, base_seed: int = 0
    ) -> "Ensemble":
        return cls(
            [MlpModel(replace(config, seed=member_seed(base_seed, i))) for i in range(k)]
        )

    def clone(self) -> "Ensemble":
        return Ensemble([m.clone() for m in self.members])

    def member_predictions(self, inputs: np.ndarray) -> np.ndarray:
        """(k, n) eval-mode scores, one row per member."""
        inputs = np.asarray(inputs)
        if inputs.shape[0] == 0:
            raise ValueError("empty input")
        return np.stack([m.predict(inputs) for m in self.members])


def demean_rows(predictions: np.ndarray) -> np.ndarray:
    return predictions - predictions.mean(axis=1, keepdims=True)


def predict_consensus(ensemble: Ensemble, inputs: np.ndarray) -> np.ndarray:
    """Mean over members of per-member de-meaned predictions."""
    return demean_rows(ensemble.member_predictions(inputs)).mean(axis=0)


def prediction_covariance(ensemble: Ensemble, inputs: np.ndarray) -> np.ndarray:
    """Sample covariance (divisor k-1) across members, candidates x candidates."""
    if ensemble.k < 2:
        raise ValueError("covariance needs at least 2 ensemble members")
    demeaned = demean_rows(ensemble.member_predictions(inputs))
    centered = demeaned - demeaned.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / (ensemble.k - 1)
    return (cov + cov.T) / 2.0


def predict_consensus_and_covariance(
    ensemble: Ensemble, inputs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Consensus and covariance from a single pass over the members."""
    if ensemble.k < 2:
        raise ValueError("covariance needs at least 2 ensemble members")
    demeaned = demean_rows(ensemble.member_predictions(inputs))
    consensus = demeaned.mean(axis=0)
    centered = demeaned - consensus
    cov = centered.T @ centered / (ensemble.k - 1)
    return consensus, (cov + cov.T) / 2.0


def train_ensemble(
    ensemble: Ensemble,
    inputs: np.ndarray,
    labels: np.ndarray,
    phase: TrainPhaseConfig,
    base_seed: int,
    loss: str = "bt",
) -> list:
    """Train every member on one shared pair split, each from its own stream.

    The split is data preparation, so it is derived from the base seed alone;
    member streams only drive initialization, dropout, and minibatch order.
    Training members in any order (or in parallel) yields identical weights.
    """
    pairs: PairSet | None = None
    if loss == "bt":
        labels_arr = np.asarray(labels, dtype=np.float64)
        if len(np.unique(labels_arr)) < 2:
            raise ValueError("degenerate pair set: all labels equal")
        pairs = enumerate_pairs(labels_arr)
        if phase.max_pairs is not None:
            pairs = subsample_pairs(pairs, phase.max_pairs, base_seed)
        pairs = split_pairs(pairs, fraction=0.8, seed=base_seed)
    return [
        train_model(
            member,
            inputs,
            labels,
            phase,
            seed=member_seed(base_seed, i),
            pairs=pairs,
            loss=loss,
        )
        for i, member in enumerate(ensemble.members)
    ]


def save_ensemble(ensemble: Ensemble, path) -> None:
    with open(path, "wb") as fh:
        fh.write(ENSEMBLE_MAGIC)
        fh.write(struct.pack("<I", ensemble.k))
        for member in ensemble.members:
            blob = _model_to_bytes(member)
            fh.write(struct.pack("<Q", len(blob)))
            fh.write(blob)


def load_ensemble(path) -> Ensemble:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:5] != ENSEMBLE_MAGIC:
        raise ValueError(f"bad ensemble magic {blob[:5]!r}")
    (count,) = struct.unpack_from("<I", blob, 5)
    offset = 9
    members = []
    for _ in range(count):
        (size,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        members.append(_model_from_bytes(blob[offset:offset + size]))
        offset += size
    if offset != len(blob):
        raise ValueError(f"{len(blob) - offset} trailing bytes in ensemble file")
    return Ensemble(members)
