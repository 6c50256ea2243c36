"""Datasets, embeddings, the training protocol, and learnability analysis."""

from .analysis import (
    AnalysisSummary,
    CarryAggregate,
    CorrelationRow,
    aggregate_analysis,
    fit_for_run,
)
from .data import all_pairs, answer_positions, build_dataset, build_sequence, eval_pairs
from .embeddings import (
    PINNED_BASE5_KERNEL,
    Semantic,
    Symbolic,
    embed_digit,
    embedding_matrix,
    gaussian_kernel,
    semantic_scheme,
)
from .stats import SigmoidFit, fit_sigmoid, sigmoid_model, spearman
from .training import (
    GENERALIZATION_KS,
    EvalAccuracy,
    EvalRow,
    GeneralizationRow,
    RunRecord,
    TrainConfig,
    config_seed,
    evaluate,
    scheme_from_config,
    train_run,
)

__all__ = [
    "AnalysisSummary",
    "CarryAggregate",
    "CorrelationRow",
    "EvalAccuracy",
    "EvalRow",
    "GENERALIZATION_KS",
    "GeneralizationRow",
    "PINNED_BASE5_KERNEL",
    "RunRecord",
    "Semantic",
    "SigmoidFit",
    "Symbolic",
    "TrainConfig",
    "aggregate_analysis",
    "all_pairs",
    "answer_positions",
    "build_dataset",
    "build_sequence",
    "config_seed",
    "embed_digit",
    "embedding_matrix",
    "eval_pairs",
    "evaluate",
    "fit_for_run",
    "fit_sigmoid",
    "gaussian_kernel",
    "scheme_from_config",
    "semantic_scheme",
    "sigmoid_model",
    "spearman",
    "train_run",
]
