"""Pearson correlation, lead-lag profiles and autocorrelation.

lagged_correlation(x, y, L) pairs x[t] with y[t + lag], so positive lags
measure how strongly x leads y. acf is the same construction of a series
against itself.
"""

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ConstantSeries, LengthMismatch


def pearson(x, y) -> float:
    """Sample Pearson correlation, clipped into [-1, 1].

    Raises:
        LengthMismatch: different lengths.
        ConstantSeries: either input has zero variance (or fewer than two
            points, where variance is undefined).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise LengthMismatch(f"x {x.shape} vs y {y.shape}")
    n = x.shape[0]
    if n < 2:
        raise ConstantSeries(f"need at least two points, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ConstantSeries("zero-variance series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def lagged_correlation(x, y, max_lag: int) -> np.ndarray:
    """Correlations of x[t] against y[t + lag] for lag = 0..max_lag."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"x {x.shape} vs y {y.shape}")
    n = x.shape[0]
    if max_lag < 0 or max_lag > n - 2:
        raise LengthMismatch(
            f"max_lag {max_lag} leaves fewer than two pairs for n={n}"
        )
    return np.array(
        [pearson(x[: n - lag], y[lag:]) for lag in range(max_lag + 1)]
    )


def acf(x, max_lag: int) -> np.ndarray:
    """Pearson autocorrelation at lags 0..max_lag; entry 0 is 1."""
    return lagged_correlation(x, x, max_lag)


def write_long_format(rows, path) -> None:
    """Write correlation rows as kind,series_x,series_y,lag,value.

    A value of None (undefined cell, e.g. a constant series) becomes an
    empty cell; finite values are written with repr for an exact round trip.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "series_x", "series_y", "lag", "value"])
        for kind, sx, sy, lag, value in rows:
            writer.writerow(
                [kind, sx, sy, lag, "" if value is None else repr(float(value))]
            )
