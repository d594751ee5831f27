"""Column-wise z-score standardization with frozen parameters."""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch


@dataclass(frozen=True)
class Standardizer:
    """Per-column mean and sample (n-1) standard deviation.

    Columns whose std is zero are mapped to exactly 0 on apply, so constant
    features carry no information instead of exploding.
    """

    means: np.ndarray
    stds: np.ndarray

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.means.shape[0]:
            raise DimensionMismatch(
                f"expected {self.means.shape[0]} columns, got {X.shape}"
            )
        safe = np.where(self.stds > 0.0, self.stds, 1.0)
        out = (X - self.means) / safe
        out[:, self.stds == 0.0] = 0.0
        return out


def fit_standardizer(X) -> Standardizer:
    """Fit column means and n-1 stds; a single row yields all-zero stds."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DimensionMismatch(f"need a nonempty 2-D matrix, got shape {X.shape}")
    means = X.mean(axis=0)
    if X.shape[0] < 2:
        stds = np.zeros(X.shape[1])
    else:
        stds = X.std(axis=0, ddof=1)
    return Standardizer(means=means, stds=stds)
