"""Walk-forward evaluation and long/short trading accounting.

Each test day t gets a model trained on the W matrix rows immediately before
t (calendar-grid rows, so interpolated days contribute training samples),
then predicts t. Trade accounting and classification metrics use trading
days only. The per-day seed is derived from (seed, date), which makes every
day's prediction independent of how much later data exists: truncating the
matrix after t cannot change the prediction for t.
"""

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import InsufficientHistory, LengthMismatch, SpanMismatch, SpanTooShort
from .features import (
    BORFE2_SET,
    BORFE5_SET,
    LITERATURE_SET,
    FeatureMatrix,
    slice_rows,
)
from .ml.metrics import ClassificationMetrics, classification_metrics
from .ml.pipeline import PipelineConfig, pipeline_predict, train_pipeline
from .rng import substream_seed

DEFAULT_NOTIONAL = 10000.0
DEFAULT_BATCH = 10


@dataclass(frozen=True)
class StrategyConfig:
    """A named feature set plus its training-window length in grid rows."""

    name: str
    specs: tuple
    window: int
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        if self.window < 10:
            raise ValueError(f"window {self.window} below the minimum of 10")


def builtin_strategies() -> dict:
    return {
        "literature": StrategyConfig("literature", LITERATURE_SET, 240),
        "borfe2": StrategyConfig("borfe2", BORFE2_SET, 40),
        "borfe5": StrategyConfig("borfe5", BORFE5_SET, 210),
    }


@dataclass(frozen=True)
class BatchScore:
    index: int
    start: date
    end: date
    n_days: int
    f1: float
    partial: bool


@dataclass(frozen=True)
class TradeSim:
    dates: tuple
    daily_pnl: np.ndarray
    cumulative: np.ndarray

    @property
    def final_pnl(self) -> float:
        return float(self.cumulative[-1]) if len(self.cumulative) else 0.0


@dataclass(frozen=True)
class BacktestResult:
    strategy: str
    dates: tuple
    y_true: np.ndarray
    y_pred: np.ndarray
    returns: np.ndarray
    metrics: ClassificationMetrics
    batches: tuple
    trades: TradeSim
    window: int
    notional: float


def walk_forward(matrix: FeatureMatrix, config: StrategyConfig,
                 test_span, seed: int = 0, notional: float = DEFAULT_NOTIONAL,
                 batch_size: int = DEFAULT_BATCH, threads: int = 1
                 ) -> BacktestResult:
    """Daily-retrain evaluation of one strategy over a test span.

    Args:
        matrix: full feature matrix (training history plus test rows).
        config: strategy; its window W counts matrix rows, not trading days.
        test_span: (first, last) dates, inclusive, of days to predict.
        seed: run seed; day d trains with substream (seed, "day", d).
        notional: per-day position size for the simulated account.
        batch_size: trading days per F1 batch.
        threads: worker threads; results are identical for any value.

    Returns:
        BacktestResult over the trading days of the span.

    Raises:
        SpanMismatch: span is not covered by the matrix rows.
        InsufficientHistory: fewer than W rows precede the first test day.
        SpanTooShort: the span holds no trading days.
    """
    first, last = test_span
    if first > last:
        raise SpanMismatch(f"test span {first}..{last} is reversed")
    try:
        lo = matrix.index_of(first)
        hi = matrix.index_of(last)
    except KeyError as missing:
        raise SpanMismatch(
            f"test span {first}..{last} not covered by matrix rows "
            f"({matrix.dates[0]}..{matrix.dates[-1]}); missing {missing}"
        ) from None
    if lo < config.window:
        raise InsufficientHistory(
            f"day {first} has {lo} prior rows; window needs {config.window}"
        )
    day_indices = [i for i in range(lo, hi + 1) if matrix.trading[i]]
    if not day_indices:
        raise SpanTooShort(f"no trading days in {first}..{last}")

    W = config.window

    def predict_day(i: int) -> int:
        train = slice_rows(matrix, i - W, i)
        day_seed = substream_seed(seed, "day", matrix.dates[i].toordinal())
        pipe = train_pipeline(train.X, train.y, config.pipeline, seed=day_seed)
        return int(pipeline_predict(pipe, matrix.X[i:i + 1])[0])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            preds = list(pool.map(predict_day, day_indices))
    else:
        preds = [predict_day(i) for i in day_indices]

    dates = tuple(matrix.dates[i] for i in day_indices)
    y_true = matrix.y[day_indices]
    y_pred = np.array(preds, dtype=np.int64)
    returns = matrix.returns[day_indices]
    metrics = classification_metrics(y_true, y_pred)
    batches = batch_f1(dates, y_true, y_pred, batch_size)
    trades = trade_sim(returns, y_pred, notional=notional, dates=dates)
    return BacktestResult(
        strategy=config.name, dates=dates, y_true=y_true, y_pred=y_pred,
        returns=returns, metrics=metrics, batches=batches, trades=trades,
        window=W, notional=notional,
    )


def batch_f1(dates, y_true, y_pred, batch_size: int = DEFAULT_BATCH) -> tuple:
    """F1 over consecutive trading-day blocks; the tail block is flagged
    partial when it is shorter than batch_size."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(dates) != y_true.shape[0] or y_true.shape != y_pred.shape:
        raise LengthMismatch("dates, y_true and y_pred must align")
    out = []
    for b, start in enumerate(range(0, len(dates), batch_size)):
        stop = min(start + batch_size, len(dates))
        m = classification_metrics(y_true[start:stop], y_pred[start:stop])
        out.append(BatchScore(
            index=b, start=dates[start], end=dates[stop - 1],
            n_days=stop - start, f1=m.f1, partial=stop - start < batch_size,
        ))
    return tuple(out)


def trade_sim(returns, positions, notional: float = DEFAULT_NOTIONAL,
              dates=None) -> TradeSim:
    """Daily P&L of holding notional * position through each day's return.

    positions are direction labels in {-1, +1}; there are no costs, so
    negating every position negates the P&L exactly, and trading with the
    true signs earns notional * sum(|return|).
    """
    returns = np.asarray(returns, dtype=float)
    positions = np.asarray(positions)
    if returns.shape != positions.shape or returns.ndim != 1:
        raise LengthMismatch(f"returns {returns.shape} vs positions {positions.shape}")
    if dates is None:
        dates = tuple(range(len(returns)))
    daily = notional * returns * positions
    return TradeSim(dates=tuple(dates), daily_pnl=daily,
                    cumulative=np.cumsum(daily))


@dataclass(frozen=True)
class ComparisonReport:
    test_span: tuple
    results: tuple


def compare_strategies(matrices: dict, configs, test_span, seed: int = 0,
                       notional: float = DEFAULT_NOTIONAL,
                       batch_size: int = DEFAULT_BATCH,
                       threads: int = 1) -> ComparisonReport:
    """Run several strategies over one common test span.

    Every strategy must have a matrix covering the span; a missing name or a
    matrix that does not contain the span raises SpanMismatch before any
    model is trained.
    """
    configs = list(configs)
    for cfg in configs:
        if cfg.name not in matrices:
            raise SpanMismatch(f"no matrix supplied for strategy {cfg.name!r}")
        matrix = matrices[cfg.name]
        try:
            matrix.index_of(test_span[0])
            matrix.index_of(test_span[1])
        except KeyError:
            raise SpanMismatch(
                f"matrix for {cfg.name!r} covers {matrix.dates[0]}.."
                f"{matrix.dates[-1]}, not the test span "
                f"{test_span[0]}..{test_span[1]}"
            ) from None
    results = [
        walk_forward(matrices[cfg.name], cfg, test_span, seed=seed,
                     notional=notional, batch_size=batch_size, threads=threads)
        for cfg in configs
    ]
    return ComparisonReport(test_span=tuple(test_span), results=tuple(results))


def write_daily_report(result: BacktestResult, path) -> None:
    """Per-day table: date,y_true,y_pred,return,pnl,cum_pnl."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "y_true", "y_pred", "return", "pnl", "cum_pnl"])
        for i, day in enumerate(result.dates):
            writer.writerow([
                day.isoformat(), int(result.y_true[i]), int(result.y_pred[i]),
                repr(float(result.returns[i])),
                repr(float(result.trades.daily_pnl[i])),
                repr(float(result.trades.cumulative[i])),
            ])


def write_batches(result: BacktestResult, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["batch", "start", "end", "n_days", "f1", "partial"])
        for b in result.batches:
            writer.writerow([
                b.index, b.start.isoformat(), b.end.isoformat(), b.n_days,
                repr(float(b.f1)), int(b.partial),
            ])
