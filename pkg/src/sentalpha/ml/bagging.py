"""Bootstrap aggregation of SVM classifiers with majority voting."""

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass
from ..rng import substream
from .svm import SvmModel, svm_from_dict, svm_predict, svm_train

_RESAMPLE_RETRIES = 16


@dataclass(frozen=True)
class BaggingEnsemble:
    members: tuple
    n_features: int

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "members": [m.to_dict() for m in self.members],
        }


def bagging_from_dict(payload: dict) -> BaggingEnsemble:
    return BaggingEnsemble(
        members=tuple(svm_from_dict(m) for m in payload["members"]),
        n_features=int(payload["n_features"]),
    )


def bagging_train(X, y, n_members: int = 9, seed: int = 0, C: float = 1.0,
                  gamma_rbf: float = 1.0, tol: float = 1e-3,
                  max_passes: int = 100) -> BaggingEnsemble:
    """Train n_members SVMs on size-n bootstrap resamples.

    Member m resamples rows with substream (seed, "bootstrap", m), so members
    are independent of each other and of ensemble size: member 3 of a 9-member
    ensemble equals member 3 of a 5-member one. A resample that collapses to
    one class is redrawn from the same substream; after _RESAMPLE_RETRIES
    misses (possible only under extreme imbalance) the first slot is forced
    to a row of the missing class so every member sees both labels.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if n_members < 1:
        raise ValueError("n_members must be >= 1")
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClass("training labels are all identical")
    n = X.shape[0]
    members = []
    for m in range(n_members):
        rng = substream(seed, "bootstrap", m)
        idx = rng.integers(0, n, size=n)
        for _ in range(_RESAMPLE_RETRIES):
            if np.unique(y[idx]).size == 2:
                break
            idx = rng.integers(0, n, size=n)
        else:
            missing = classes[0] if np.all(y[idx] == classes[1]) else classes[1]
            idx[0] = int(np.argmax(y == missing))
        members.append(
            svm_train(X[idx], y[idx], C=C, gamma_rbf=gamma_rbf, tol=tol,
                      max_passes=max_passes)
        )
    return BaggingEnsemble(members=tuple(members), n_features=X.shape[1])


def bagging_predict(ensemble: BaggingEnsemble, X) -> np.ndarray:
    """Majority vote across members; a tied vote sum maps to +1."""
    X = np.asarray(X, dtype=float)
    votes = np.zeros(X.shape[0])
    for member in ensemble.members:
        votes += svm_predict(member, X)
    return np.where(votes >= 0.0, 1, -1).astype(np.int64)
