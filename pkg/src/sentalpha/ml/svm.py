"""Soft-margin SVM with an RBF kernel, solved in the dual.

The solver repeatedly updates the maximal violating pair: i maximizing and j
minimizing -E over the index sets allowed to move up respectively down, where
E_k = f_k - y_k and f is the decision value without bias. Optimality is
declared when the violation m - M drops to tol. Each two-variable subproblem
is solved analytically and clipped to the box, so the dual objective never
decreases. The bias is the midpoint (m + M) / 2 at the final iterate.

Hitting the iteration cap is not an error: the model is returned with
converged=False and the final KKT residual for the caller to inspect.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, LengthMismatch, SingleClass

STALL_STEP = 1e-14
DEGENERATE_ETA = 1e-12
BOUND_SNAP = 1e-12


def rbf_gram(A, B, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for all pairs; clips tiny negative d^2."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d2 = (
        (A * A).sum(axis=1)[:, None]
        + (B * B).sum(axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


@dataclass(frozen=True)
class SvmModel:
    """Trained classifier; support_vectors holds rows with alpha > 0 and
    dual_coef the matching alpha_i * y_i."""

    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float
    C: float
    gamma_rbf: float
    n_features: int
    converged: bool
    kkt_residual: float
    n_iter: int
    dual_objective: tuple

    def to_dict(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "C": self.C,
            "gamma_rbf": self.gamma_rbf,
            "n_features": self.n_features,
            "converged": self.converged,
            "kkt_residual": self.kkt_residual,
            "n_iter": self.n_iter,
            "dual_objective": list(self.dual_objective),
        }


def svm_from_dict(payload: dict) -> SvmModel:
    return SvmModel(
        support_vectors=np.asarray(payload["support_vectors"], dtype=float)
        .reshape(-1, payload["n_features"]),
        dual_coef=np.asarray(payload["dual_coef"], dtype=float),
        bias=float(payload["bias"]),
        C=float(payload["C"]),
        gamma_rbf=float(payload["gamma_rbf"]),
        n_features=int(payload["n_features"]),
        converged=bool(payload["converged"]),
        kkt_residual=float(payload["kkt_residual"]),
        n_iter=int(payload["n_iter"]),
        dual_objective=tuple(payload["dual_objective"]),
    )


def _snap(value: float, C: float) -> float:
    eps = BOUND_SNAP * max(1.0, C)
    if value < eps:
        return 0.0
    if value > C - eps:
        return C
    return value


def _movable_masks(alpha, yf, C):
    up = ((yf > 0) & (alpha < C)) | ((yf < 0) & (alpha > 0))
    lo = ((yf > 0) & (alpha > 0)) | ((yf < 0) & (alpha < C))
    return up, lo


def svm_train(X, y, C: float = 1.0, gamma_rbf: float = 1.0,
              tol: float = 1e-3, max_passes: int = 100) -> SvmModel:
    """Train on labels in {-1, +1}.

    Args:
        X: (n, p) feature matrix.
        y: (n,) labels.
        C: box constraint.
        gamma_rbf: RBF width parameter (resolved, numeric).
        tol: KKT violation threshold for convergence.
        max_passes: iteration cap of max_passes * n pair updates.

    Raises:
        SingleClass: all labels equal.
        LengthMismatch: X and y row counts differ.
        ValueError: labels outside -1/+1 or non-positive C/gamma.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"X rows {X.shape} vs y {y.shape}")
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be -1 or +1")
    if C <= 0 or gamma_rbf <= 0:
        raise ValueError("C and gamma_rbf must be positive")
    yf = y.astype(float)
    if np.all(yf == yf[0]):
        raise SingleClass("training labels are all identical")

    n = X.shape[0]
    K = rbf_gram(X, X, gamma_rbf)
    alpha = np.zeros(n)
    f = np.zeros(n)
    history = []
    max_iter = max_passes * n
    it = 0
    kkt = np.inf
    converged = False

    def dual_value():
        return float(alpha.sum() - 0.5 * np.dot(alpha * yf, f))

    while it < max_iter:
        if it % n == 0:
            history.append(dual_value())
        up, lo = _movable_masks(alpha, yf, C)
        if not up.any() or not lo.any():
            kkt = 0.0
            converged = True
            break
        negE = yf - f
        i = int(np.argmax(np.where(up, negE, -np.inf)))
        j = int(np.argmin(np.where(lo, negE, np.inf)))
        kkt = float(negE[i] - negE[j])
        if kkt <= tol:
            converged = True
            break

        s = yf[i] * yf[j]
        if s > 0:
            L = max(0.0, alpha[i] + alpha[j] - C)
            H = min(C, alpha[i] + alpha[j])
        else:
            L = max(0.0, alpha[j] - alpha[i])
            H = min(C, C + alpha[j] - alpha[i])
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        # gradient of the dual along the feasible line, in the alpha_j coord
        g_j = yf[j] * ((f[i] - yf[i]) - (f[j] - yf[j]))
        if eta > DEGENERATE_ETA:
            a_j = alpha[j] + g_j / eta
        elif g_j > 0:
            a_j = H
        elif g_j < 0:
            a_j = L
        else:
            break
        # snap near-bound values onto the bound so rounding dust cannot
        # leave a multiplier selectable with a zero feasible step
        a_j = _snap(min(max(a_j, L), H), C)
        d_j = a_j - alpha[j]
        if abs(d_j) < STALL_STEP:
            break
        a_i = _snap(min(max(alpha[i] - s * d_j, 0.0), C), C)
        d_i = a_i - alpha[i]
        alpha[j] = a_j
        alpha[i] = a_i
        f += (d_i * yf[i]) * K[:, i] + (d_j * yf[j]) * K[:, j]
        it += 1

    history.append(dual_value())

    up, lo = _movable_masks(alpha, yf, C)
    negE = yf - f
    if up.any() and lo.any():
        bias = float((np.max(negE[up]) + np.min(negE[lo])) / 2.0)
    else:
        sv = alpha > 0
        bias = float(np.mean(negE[sv])) if sv.any() else 0.0

    keep = alpha > 0
    return SvmModel(
        support_vectors=X[keep].copy(),
        dual_coef=(alpha * yf)[keep],
        bias=bias,
        C=float(C),
        gamma_rbf=float(gamma_rbf),
        n_features=X.shape[1],
        converged=converged,
        kkt_residual=float(kkt),
        n_iter=it,
        dual_objective=tuple(history),
    )


def svm_decision(model: SvmModel, X) -> np.ndarray:
    """Signed decision values; sign is the predicted label, zero is +1."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected {model.n_features} columns, got {X.shape}"
        )
    if model.support_vectors.shape[0] == 0:
        return np.full(X.shape[0], model.bias)
    return rbf_gram(X, model.support_vectors, model.gamma_rbf) @ model.dual_coef \
        + model.bias


def svm_predict(model: SvmModel, X) -> np.ndarray:
    return np.where(svm_decision(model, X) >= 0.0, 1, -1).astype(np.int64)
