"""Two-phase ranking-network training: naturalness warm-start, activity fine-tune.

Both phases minimize the Bradley-Terry pair loss with Adam and stop early on
the validation partition of the pair split. Because the loss only sees score
differences, the same network can be pretrained on naturalness values and then
fine-tuned on activity measurements even though the two label sets live on
unrelated scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import LogProbMatrix, Variant, all_single_mutants
from ..zeroshot import naturalness_score
from .mlp import Adam, MlpModel
from .pairs import PairSet, bt_loss, bt_loss_and_grad, enumerate_pairs, split_pairs, subsample_pairs


@dataclass(frozen=True)
class TrainPhaseConfig:
    max_epochs: int
    patience_epochs: int
    validate_every: int
    learning_rate: float = 3e-4
    weight_decay: float = 1e-5
    min_improvement: float = 1e-6
    item_batch_size: int | None = None  # None trains full-batch
    max_pairs: int | None = None  # seeded subsample bound before splitting

    def __post_init__(self):
        if self.max_epochs < 0 or self.patience_epochs <= 0 or self.validate_every <= 0:
            raise ValueError("epoch counts must be positive")
        if self.patience_epochs < self.validate_every:
            raise ValueError("patience must cover at least one validation interval")


WARM_START_PHASE = TrainPhaseConfig(
    max_epochs=50, patience_epochs=20, validate_every=5, item_batch_size=32
)
ACTIVITY_PHASE = TrainPhaseConfig(max_epochs=200, patience_epochs=40, validate_every=10)

MIN_TRAIN_ITEMS = 4  # short trailing minibatches are folded into the previous one


@dataclass
class TrainHistory:
    epochs: list[tuple[int, float]] = field(default_factory=list)  # (epoch, train loss)
    validations: list[tuple[int, float]] = field(default_factory=list)
    best_epoch: int | None = None
    stopped_epoch: int = 0


def warm_start_targets(
    reference: str, logprobs: LogProbMatrix
) -> list[tuple[Variant, float]]:
    """All 19*L single mutants of the reference with their naturalness scores."""
    if logprobs.length != len(reference):
        raise ValueError(
            f"log-prob matrix length {logprobs.length} != reference length {len(reference)}"
        )
    return [
        (v, naturalness_score(v, logprobs, reference))
        for v in all_single_mutants(reference)
    ]


def _item_chunks(rng, n_items: int, batch_size: int):
    """Shuffled item minibatches; a trailing chunk below MIN_TRAIN_ITEMS is
    folded into the previous one so batch norm always sees a real batch."""
    order = rng.permutation(n_items)
    edges = list(range(0, n_items, batch_size))
    if len(edges) > 1 and n_items - edges[-1] < MIN_TRAIN_ITEMS:
        edges.pop()
    for i, start in enumerate(edges):
        stop = edges[i + 1] if i + 1 < len(edges) else n_items
        yield order[start:stop]


def train_model(
    model: MlpModel,
    inputs: np.ndarray,
    labels: np.ndarray,
    phase: TrainPhaseConfig,
    seed: int,
    pairs: PairSet | None = None,
    loss: str = "bt",
) -> TrainHistory:
    """Train in place; early-stops on validation loss and restores the best weights.

    ``pairs`` may carry a precomputed partition (shared across ensemble
    members); otherwise all directed pairs are enumerated, optionally
    subsampled to ``phase.max_pairs``, and split 80/20 here. With loss="mse"
    the pair machinery is bypassed and items themselves are split 80/20.
    """
    inputs = np.asarray(inputs)
    labels = np.asarray(labels, dtype=np.float64)
    if inputs.shape[0] != labels.shape[0]:
        raise ValueError("inputs/labels length mismatch")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xD120]))
    history = TrainHistory()
    if phase.max_epochs == 0:
        return history

    if loss == "bt":
        if len(np.unique(labels)) < 2:
            raise ValueError("degenerate pair set: all labels equal")
        if pairs is None:
            pairs = enumerate_pairs(labels)
            if phase.max_pairs is not None:
                pairs = subsample_pairs(pairs, phase.max_pairs, seed)
            pairs = split_pairs(pairs, fraction=0.8, seed=seed)
        elif pairs.is_train is None:
            pairs = split_pairs(pairs, fraction=0.8, seed=seed)
        tw, tl = pairs.train
        vw, vl = pairs.validation
        if len(tw) == 0:
            raise ValueError("no training pairs after split")

        n_items = inputs.shape[0]

        def train_epoch():
            if phase.item_batch_size is None or phase.item_batch_size >= n_items:
                scores, cache = model.forward(inputs, train=True, rng=rng)
                step_loss, grad_scores = bt_loss_and_grad(scores, tw, tl)
                optimizer.step(model.params, model.backward(cache, grad_scores))
                return step_loss
            # loss over all train pairs falling inside each item minibatch
            total, count = 0.0, 0
            for chunk in _item_chunks(rng, n_items, phase.item_batch_size):
                member = np.zeros(n_items, dtype=bool)
                member[chunk] = True
                inside = member[tw] & member[tl]
                if not inside.any():
                    continue
                remap = np.zeros(n_items, dtype=np.int64)
                remap[chunk] = np.arange(len(chunk))
                scores, cache = model.forward(inputs[chunk], train=True, rng=rng)
                step_loss, grad_scores = bt_loss_and_grad(
                    scores, remap[tw[inside]], remap[tl[inside]]
                )
                optimizer.step(model.params, model.backward(cache, grad_scores))
                total += step_loss * int(inside.sum())
                count += int(inside.sum())
            return total / count if count else float("nan")

        def validation_loss():
            return bt_loss(model.predict(inputs), vw, vl)

        has_validation = len(vw) > 0
    elif loss == "mse":
        order = rng.permutation(len(labels))
        n_train = max(2, int(round(0.8 * len(labels))))
        train_idx, val_idx = order[:n_train], order[n_train:]

        def train_epoch():
            scores, cache = model.forward(inputs[train_idx], train=True, rng=rng)
            resid = scores - labels[train_idx]
            step_loss = float(np.mean(resid**2))
            optimizer.step(model.params, model.backward(cache, 2.0 * resid / len(resid)))
            return step_loss

        def validation_loss():
            resid = model.predict(inputs[val_idx]) - labels[val_idx]
            return float(np.mean(resid**2))

        has_validation = len(val_idx) > 0
    else:
        raise ValueError(f"unknown loss {loss!r}")

    optimizer = Adam(
        model.params,
        learning_rate=phase.learning_rate,
        weight_decay=phase.weight_decay,
    )
    best_loss = np.inf
    best_state = None
    last_improvement = 0
    for epoch in range(1, phase.max_epochs + 1):
        history.epochs.append((epoch, train_epoch()))
        history.stopped_epoch = epoch
        if has_validation and epoch % phase.validate_every == 0:
            val = validation_loss()
            history.validations.append((epoch, val))
            if val < best_loss - phase.min_improvement:
                best_loss = val
                best_state = model.snapshot()
                history.best_epoch = epoch
                last_improvement = epoch
            elif epoch - last_improvement >= phase.patience_epochs:
                break
    if best_state is not None:
        model.restore(best_state)
    return history
