from .gbdt import (
    Model,
    ModelParams,
    Split,
    Tree,
    best_split,
    load_model,
    logistic_grad_hess,
    predict,
    train_gbdt,
)
from .knn import KnnRanker, knn_rank

__all__ = [
    "Model",
    "ModelParams",
    "Split",
    "Tree",
    "best_split",
    "load_model",
    "logistic_grad_hess",
    "predict",
    "train_gbdt",
    "KnnRanker",
    "knn_rank",
]
