"""Domain-adapted word embeddings via CCA and kernel CCA."""

from ._daembed import (
    CcaModel,
    EmbeddingTable,
    Error,
    KccaModel,
    adapt,
    cca_fit,
    combine,
    concsvd,
    cross_validate,
    gaussian_gram,
    kcca_fit,
    load_embeddings,
    lsa,
    median_bandwidth,
    metrics,
    run_pipeline,
    save_embeddings,
    solve_combination_weights,
    stratified_folds,
    tokenize,
    train_logreg,
)

__all__ = [
    "CcaModel",
    "EmbeddingTable",
    "Error",
    "KccaModel",
    "adapt",
    "cca_fit",
    "combine",
    "concsvd",
    "cross_validate",
    "gaussian_gram",
    "kcca_fit",
    "load_embeddings",
    "lsa",
    "median_bandwidth",
    "metrics",
    "run_pipeline",
    "save_embeddings",
    "solve_combination_weights",
    "stratified_folds",
    "tokenize",
    "train_logreg",
]
