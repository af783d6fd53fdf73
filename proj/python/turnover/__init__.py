"""Share turnover class prediction toolkit."""

from ._turnover import (
    Dataset,
    Model,
    default_bins,
    derive_seed,
    discretize,
    generate_synthetic,
    load_model,
    read_dataset_csv,
    run_boruta,
    save_model,
    split,
    train_forest,
    train_logreg,
    train_svm,
    train_tree,
    write_dataset_csv,
)

__all__ = [
    "Dataset",
    "Model",
    "default_bins",
    "derive_seed",
    "discretize",
    "generate_synthetic",
    "load_model",
    "read_dataset_csv",
    "run_boruta",
    "save_model",
    "split",
    "train_forest",
    "train_logreg",
    "train_svm",
    "train_tree",
    "write_dataset_csv",
]
