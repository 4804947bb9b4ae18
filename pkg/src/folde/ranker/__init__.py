"""Ranking-network ensemble: pair machinery, MLP, two-phase training."""

from .ensemble import (
    DEFAULT_ENSEMBLE_SIZE,
    Ensemble,
    load_ensemble,
    member_seed,
    predict_consensus,
    predict_consensus_and_covariance,
    prediction_covariance,
    save_ensemble,
    train_ensemble,
)
from .mlp import Adam, MlpConfig, MlpModel, load_model, save_model
from .pairs import (
    PairSet,
    bt_loss,
    bt_loss_and_grad,
    enumerate_pairs,
    split_pairs,
    subsample_pairs,
)
from .training import (
    ACTIVITY_PHASE,
    WARM_START_PHASE,
    TrainHistory,
    TrainPhaseConfig,
    train_model,
    warm_start_targets,
)

__all__ = [
    "ACTIVITY_PHASE",
    "Adam",
    "DEFAULT_ENSEMBLE_SIZE",
    "Ensemble",
    "MlpConfig",
    "MlpModel",
    "PairSet",
    "TrainHistory",
    "TrainPhaseConfig",
    "WARM_START_PHASE",
    "bt_loss",
    "bt_loss_and_grad",
    "enumerate_pairs",
    "load_ensemble",
    "load_model",
    "member_seed",
    "predict_consensus",
    "predict_consensus_and_covariance",
    "prediction_covariance",
    "save_ensemble",
    "save_model",
    "split_pairs",
    "subsample_pairs",
    "train_ensemble",
    "train_model",
    "warm_start_targets",
]
