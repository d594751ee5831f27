"""Minority oversampling by interpolation between nearest neighbors.

Each synthetic row is x_b + u * (x_nn - x_b) for a random minority base b,
one of its k nearest minority neighbors (Euclidean), and u uniform in [0, 1).
Exactly enough rows are synthesized to equalize the two class counts.
"""

import numpy as np

from ..errors import LengthMismatch, SingleClass, TooFewMinority
from ..rng import substream


def smote_balance(X, y, k: int = 5, seed: int = 0):
    """Balance a two-class dataset by synthesizing minority rows.

    Args:
        X: (n, p) feature matrix.
        y: labels in {-1, +1}.
        k: neighborhood size; clamped to minority_count - 1.
        seed: substream seed; same inputs and seed give identical output.

    Returns:
        (X_bal, y_bal) with equal class counts; synthetic rows appended
        after the originals in generation order. Already-balanced input is
        returned as copies, unchanged.

    Raises:
        SingleClass: only one label present.
        TooFewMinority: minority class has fewer than two rows.
        LengthMismatch: X and y row counts differ.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"X rows {X.shape} vs y {y.shape}")
    labels = np.unique(y)
    if labels.size < 2:
        raise SingleClass("need both classes to balance")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == -1))
    if n_pos == n_neg:
        return X.copy(), y.copy()
    minority_label = 1 if n_pos < n_neg else -1
    n_min = min(n_pos, n_neg)
    n_needed = abs(n_pos - n_neg)
    if n_min < 2:
        raise TooFewMinority(
            f"minority class has {n_min} row(s); need at least 2"
        )
    k_eff = min(k, n_min - 1)
    minority = X[y == minority_label]
    # pairwise distances among minority rows; self excluded from neighbors
    d2 = ((minority[:, None, :] - minority[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    neighbor_ids = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
    rng = substream(seed, "smote")
    synth = np.empty((n_needed, X.shape[1]))
    for i in range(n_needed):
        b = int(rng.integers(n_min))
        nn = int(neighbor_ids[b, int(rng.integers(k_eff))])
        u = rng.random()
        synth[i] = minority[b] + u * (minority[nn] - minority[b])
    X_bal = np.vstack([X, synth])
    y_bal = np.concatenate([y, np.full(n_needed, minority_label, np.int64)])
    return X_bal, y_bal
