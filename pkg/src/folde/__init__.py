"""Active-learning-assisted directed evolution engine.

Zero-shot naturalness selection, warm-started ranking ensembles, constant-liar
batch construction, a simulation benchmark harness, and a live campaign
service.
"""

from .core import (
    ALPHABET,
    Dataset,
    EmbeddingStore,
    LogProbMatrix,
    Mutation,
    Variant,
    all_single_mutants,
    load_dataset,
    load_embeddings,
    load_logprobs,
    parse_variant,
    save_dataset,
    save_embeddings,
    save_logprobs,
)
from .selector import CLState, cl_update, constant_liar_select, top_n_select, ucb_score
from .zeroshot import NaturalnessTable, naturalness_score, zero_shot_select

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "CLState",
    "Dataset",
    "EmbeddingStore",
    "LogProbMatrix",
    "Mutation",
    "NaturalnessTable",
    "Variant",
    "all_single_mutants",
    "cl_update",
    "constant_liar_select",
    "load_dataset",
    "load_embeddings",
    "load_logprobs",
    "naturalness_score",
    "parse_variant",
    "save_dataset",
    "save_embeddings",
    "save_logprobs",
    "top_n_select",
    "ucb_score",
    "zero_shot_select",
]
