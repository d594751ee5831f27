"""Joint feature-count/forest-size selection by Bayesian optimization.

The inner routine is recursive feature elimination: retrain a forest each
round and drop the single lowest-importance feature until gamma remain. The
outer loop proposes integer pairs (gamma, theta) on a grid, scores each once
with a fixed train/evaluate split at the tail of the supplied rows, and
models the scores with a Matern-5/2 Gaussian process maximized by expected
improvement. The first proposals come from a Halton sequence; every later
one is the EI argmax over the not-yet-evaluated grid.

Everything is deterministic given (data, config): GP hyperparameters come
from a small maximum-likelihood grid, EI ties break toward the earlier grid
point (gamma-major order), and each evaluation derives its seed from
(config.seed, gamma, theta) so re-evaluating a point reproduces its score.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SpanTooShort
from .ml.forest import forest_train
from .ml.metrics import classification_metrics
from .ml.pipeline import PipelineConfig, pipeline_predict, train_pipeline
from .rng import substream_seed

SQRT5 = math.sqrt(5.0)


def rfe(X, y, n_keep: int, n_trees: int, seed: int) -> list:
    """Indices of the n_keep columns surviving one-at-a-time elimination.

    Each round fits a fresh forest on the surviving columns and removes the
    one with the lowest importance (first such index on ties). Returned
    indices are in original column order.
    """
    X = np.asarray(X, dtype=float)
    n_feat = X.shape[1]
    if not 1 <= n_keep <= n_feat:
        raise ValueError(f"n_keep {n_keep} outside 1..{n_feat}")
    active = list(range(n_feat))
    round_no = 0
    while len(active) > n_keep:
        model = forest_train(
            X[:, active], y, n_trees=n_trees,
            seed=substream_seed(seed, "round", round_no),
        )
        drop = int(np.argmin(model.importances))
        del active[drop]
        round_no += 1
    return active


@dataclass(frozen=True)
class BoRfeConfig:
    iterations: int = 50
    train_days: int = 222
    test_days: int = 30
    gamma_range: tuple | None = None
    theta_range: tuple = (1, 100)
    seed: int = 0
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)


@dataclass(frozen=True)
class BoEvaluation:
    k: int
    gamma: int
    theta: int
    f1: float
    kept: tuple


@dataclass(frozen=True)
class SelectionResult:
    gamma: int
    theta: int
    features: tuple
    best_f1: float
    evaluations: tuple

    @property
    def f1_history(self) -> tuple:
        return tuple(e.f1 for e in self.evaluations)


def objective(gamma: int, theta: int, X, y, config: BoRfeConfig):
    """Score one (gamma, theta): RFE on the head rows, F1 on the next block.

    Returns:
        (f1, kept_indices) where kept_indices has length gamma.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    need = config.train_days + config.test_days
    if X.shape[0] < need:
        raise SpanTooShort(
            f"need {need} rows for the selection split, have {X.shape[0]}"
        )
    t0 = config.train_days
    Xtr, ytr = X[:t0], y[:t0]
    Xte = X[t0:need]
    yte = y[t0:need]
    eval_seed = substream_seed(config.seed, "objective", gamma, theta)
    kept = rfe(Xtr, ytr, n_keep=gamma, n_trees=theta,
               seed=substream_seed(eval_seed, "rfe"))
    pipe = train_pipeline(Xtr[:, kept], ytr, config.pipeline,
                          seed=substream_seed(eval_seed, "fit"))
    preds = pipeline_predict(pipe, Xte[:, kept])
    f1 = classification_metrics(yte, preds).f1
    return f1, tuple(kept)


def halton(index: int, base: int) -> float:
    """Radical-inverse value of index (1-based) in the given base."""
    f = 1.0
    r = 0.0
    i = index
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def _matern52(scaled_a, scaled_b, lengthscales):
    diff = (scaled_a[:, None, :] - scaled_b[None, :, :]) / lengthscales
    d = np.sqrt(np.maximum((diff * diff).sum(axis=2), 0.0))
    sd = SQRT5 * d
    return (1.0 + sd + sd * sd / 3.0) * np.exp(-sd)


_LS_GRID = (0.1, 0.2, 0.35, 0.6, 1.0)
_NOISE_GRID = (1e-6, 1e-4, 1e-2)


class _Gp:
    """Matern-5/2 GP with hyperparameters picked by grid-search likelihood."""

    def __init__(self, X_obs, y_obs):
        self.X = X_obs
        self.y_mean = float(np.mean(y_obs))
        resid = y_obs - self.y_mean
        sig2 = float(np.var(resid))
        if sig2 <= 0.0:
            sig2 = 1e-8
        self.sig2 = sig2
        n = X_obs.shape[0]
        best = None
        for ls0 in _LS_GRID:
            for ls1 in _LS_GRID:
                ls = np.array([ls0, ls1])
                base = sig2 * _matern52(X_obs, X_obs, ls)
                for noise_rel in _NOISE_GRID:
                    noise = max(noise_rel * sig2, 1e-12)
                    K = base + (noise + 1e-10 * sig2) * np.eye(n)
                    try:
                        L = np.linalg.cholesky(K)
                    except np.linalg.LinAlgError:
                        continue
                    alpha = np.linalg.solve(
                        L.T, np.linalg.solve(L, resid)
                    )
                    logml = (
                        -0.5 * float(resid @ alpha)
                        - float(np.sum(np.log(np.diag(L))))
                        - 0.5 * n * math.log(2.0 * math.pi)
                    )
                    if best is None or logml > best[0]:
                        best = (logml, ls, noise, L, alpha)
        _, self.ls, self.noise, self.L, self.alpha = best

    def predict(self, X_new):
        ks = self.sig2 * _matern52(X_new, self.X, self.ls)
        mu = self.y_mean + ks @ self.alpha
        v = np.linalg.solve(self.L, ks.T)
        var = self.sig2 - (v * v).sum(axis=0)
        return mu, np.sqrt(np.maximum(var, 0.0))


def expected_improvement(mu, sigma, best) -> np.ndarray:
    """EI for maximization; zero wherever predictive sigma is zero."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    out = np.zeros_like(mu)
    ok = sigma > 0.0
    z = (mu[ok] - best) / sigma[ok]
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    Phi = 0.5 * (1.0 + np.array([math.erf(v / math.sqrt(2.0)) for v in z]))
    out[ok] = (mu[ok] - best) * Phi + sigma[ok] * phi
    return np.maximum(out, 0.0)


def _scale_grid(points, gamma_range, theta_range):
    pts = np.asarray(points, dtype=float)
    out = np.empty_like(pts)
    for col, (lo, hi) in enumerate((gamma_range, theta_range)):
        if hi > lo:
            out[:, col] = (pts[:, col] - lo) / (hi - lo)
        else:
            out[:, col] = 0.5
    return out


def bo_rfe_run(X, y, feature_names, config: BoRfeConfig) -> SelectionResult:
    """Run the full selection loop and return the best observed point.

    Args:
        X: candidate rows, oldest first; the first train_days rows train,
            the next test_days rows score.
        y: labels aligned with X.
        feature_names: column names reported in the result.
        config: loop settings; gamma_range of None means (1, n_features).

    Returns:
        SelectionResult; the winner is the earliest evaluation achieving the
        maximum F1, and its kept features are reported by name.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    feature_names = tuple(feature_names)
    if len(feature_names) != X.shape[1]:
        raise ValueError("feature_names must match X width")
    gamma_range = config.gamma_range or (1, X.shape[1])
    g_lo, g_hi = map(int, gamma_range)
    t_lo, t_hi = map(int, config.theta_range)
    if not (1 <= g_lo <= g_hi <= X.shape[1]):
        raise ValueError(f"gamma_range {gamma_range} invalid for {X.shape[1]} columns")
    if not (1 <= t_lo <= t_hi):
        raise ValueError(f"theta_range {config.theta_range} invalid")
    if config.iterations < 1:
        raise ValueError("iterations must be >= 1")

    grid = [(g, t) for g in range(g_lo, g_hi + 1) for t in range(t_lo, t_hi + 1)]
    budget = min(config.iterations, len(grid))
    n_seed = min(5, budget)

    seeds = []
    tried = set()
    h_index = 1
    while len(seeds) < n_seed and h_index < 100000:
        g = g_lo + int(halton(h_index, 2) * (g_hi - g_lo + 1))
        t = t_lo + int(halton(h_index, 3) * (t_hi - t_lo + 1))
        g = min(g, g_hi)
        t = min(t, t_hi)
        h_index += 1
        if (g, t) in tried:
            continue
        tried.add((g, t))
        seeds.append((g, t))
    for point in grid:
        if len(seeds) >= n_seed:
            break
        if point not in tried:
            tried.add(point)
            seeds.append(point)

    evaluations = []
    evaluated = set()

    def run_point(k, g, t):
        f1, kept = objective(g, t, X, y, config)
        evaluations.append(
            BoEvaluation(k=k, gamma=g, theta=t, f1=f1,
                         kept=tuple(feature_names[i] for i in kept))
        )
        evaluated.add((g, t))

    for k, (g, t) in enumerate(seeds):
        run_point(k, g, t)

    while len(evaluations) < budget:
        remaining = [p for p in grid if p not in evaluated]
        obs = np.array([(e.gamma, e.theta) for e in evaluations], dtype=float)
        scores = np.array([e.f1 for e in evaluations])
        gp = _Gp(_scale_grid(obs, (g_lo, g_hi), (t_lo, t_hi)), scores)
        mu, sigma = gp.predict(
            _scale_grid(np.array(remaining, dtype=float),
                        (g_lo, g_hi), (t_lo, t_hi))
        )
        ei = expected_improvement(mu, sigma, float(scores.max()))
        g, t = remaining[int(np.argmax(ei))]
        run_point(len(evaluations), g, t)

    best = evaluations[0]
    for e in evaluations[1:]:
        if e.f1 > best.f1:
            best = e
    return SelectionResult(
        gamma=best.gamma,
        theta=best.theta,
        features=best.kept,
        best_f1=best.f1,
        evaluations=tuple(evaluations),
    )


def write_selection(result: SelectionResult, path) -> None:
    """JSON report consumed by the backtest strategy loader."""
    payload = {
        "gamma": result.gamma,
        "theta": result.theta,
        "best_f1": result.best_f1,
        "features": list(result.features),
        "evaluations": [
            {"k": e.k, "gamma": e.gamma, "theta": e.theta, "f1": e.f1,
             "features": list(e.kept)}
            for e in result.evaluations
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_selection(path) -> SelectionResult:
    payload = json.loads(Path(path).read_text())
    evaluations = tuple(
        BoEvaluation(k=e["k"], gamma=e["gamma"], theta=e["theta"],
                     f1=e["f1"], kept=tuple(e["features"]))
        for e in payload["evaluations"]
    )
    return SelectionResult(
        gamma=int(payload["gamma"]),
        theta=int(payload["theta"]),
        features=tuple(payload["features"]),
        best_f1=float(payload["best_f1"]),
        evaluations=evaluations,
    )
