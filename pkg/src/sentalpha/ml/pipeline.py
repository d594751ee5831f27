"""Standardize, balance, then bag SVMs: the training recipe used everywhere.

gamma_rbf may be the string "scale", resolved against the matrix the SVMs
actually see (standardized and balanced): 1 / (n_features * pooled variance),
falling back to 1.0 when the pooled variance is not positive.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass
from ..rng import substream_seed
from .bagging import (
    BaggingEnsemble,
    bagging_from_dict,
    bagging_predict,
    bagging_train,
)
from .scaling import Standardizer, fit_standardizer
from .smote import smote_balance


@dataclass(frozen=True)
class PipelineConfig:
    C: float = 1.0
    gamma_rbf: object = "scale"
    n_members: int = 9
    smote_k: int = 5
    svm_tol: float = 1e-3
    svm_max_passes: int = 100


@dataclass(frozen=True)
class TrainedPipeline:
    standardizer: Standardizer
    ensemble: BaggingEnsemble
    config: PipelineConfig
    gamma_value: float
    n_features: int


def resolve_gamma(gamma_rbf, X) -> float:
    if gamma_rbf == "scale":
        pooled = float(np.var(np.asarray(X, dtype=float)))
        if pooled <= 0.0:
            return 1.0
        return 1.0 / (X.shape[1] * pooled)
    value = float(gamma_rbf)
    if value <= 0.0:
        raise ValueError("gamma_rbf must be positive")
    return value


def train_pipeline(X, y, config: PipelineConfig = PipelineConfig(),
                   seed: int = 0) -> TrainedPipeline:
    """Fit the full recipe on one training window.

    Balancing is skipped when the classes are already equal or the minority
    has fewer than two rows (nothing to interpolate between); the ensemble
    then trains on the standardized matrix as is.

    Raises:
        SingleClass: one label only in y.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if np.unique(y).size < 2:
        raise SingleClass("training labels are all identical")
    standardizer = fit_standardizer(X)
    Xs = standardizer.apply(X)
    n_min = int(min(np.sum(y == 1), np.sum(y == -1)))
    if n_min >= 2 and np.sum(y == 1) != np.sum(y == -1):
        Xb, yb = smote_balance(Xs, y, k=config.smote_k,
                               seed=substream_seed(seed, "smote"))
    else:
        Xb, yb = Xs, y
    gamma = resolve_gamma(config.gamma_rbf, Xb)
    ensemble = bagging_train(
        Xb, yb, n_members=config.n_members,
        seed=substream_seed(seed, "bagging"),
        C=config.C, gamma_rbf=gamma, tol=config.svm_tol,
        max_passes=config.svm_max_passes,
    )
    return TrainedPipeline(standardizer=standardizer, ensemble=ensemble,
                           config=config, gamma_value=gamma,
                           n_features=X.shape[1])


def pipeline_predict(pipe: TrainedPipeline, X) -> np.ndarray:
    return bagging_predict(pipe.ensemble, pipe.standardizer.apply(X))


def pipeline_to_dict(pipe: TrainedPipeline) -> dict:
    cfg = pipe.config
    return {
        "standardizer": {
            "means": pipe.standardizer.means.tolist(),
            "stds": pipe.standardizer.stds.tolist(),
        },
        "ensemble": pipe.ensemble.to_dict(),
        "config": {
            "C": cfg.C, "gamma_rbf": cfg.gamma_rbf,
            "n_members": cfg.n_members, "smote_k": cfg.smote_k,
            "svm_tol": cfg.svm_tol, "svm_max_passes": cfg.svm_max_passes,
        },
        "gamma_value": pipe.gamma_value,
        "n_features": pipe.n_features,
    }


def pipeline_from_dict(payload: dict) -> TrainedPipeline:
    cfg = PipelineConfig(**payload["config"])
    standardizer = Standardizer(
        means=np.asarray(payload["standardizer"]["means"], dtype=float),
        stds=np.asarray(payload["standardizer"]["stds"], dtype=float),
    )
    return TrainedPipeline(
        standardizer=standardizer,
        ensemble=bagging_from_dict(payload["ensemble"]),
        config=cfg,
        gamma_value=float(payload["gamma_value"]),
        n_features=int(payload["n_features"]),
    )
