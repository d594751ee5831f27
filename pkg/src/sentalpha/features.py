"""Lagged feature specs and supervised matrix assembly on the calendar grid.

A spec names one column: a lagged return, a per-session sentiment index, a
full-day negative count, or a lagged bar field. Lags count calendar days on
the aligned grid. Lag 0 is legal only for pre-market sentiment, which is the
one quantity fully observable before the day's trading starts; every other
kind must look back at least one day.

Canonical names are stable identifiers: R[t-1], S_pre[t-0], S_intra[t-7],
N[t-7], Open[t-1], TradeValue[t-1], ...
"""

import csv
import re
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import MalformedRecord, MissingReturn, SpanTooShort
from .market_data import ReturnSeries
from .sentiment import Session, counts_lookup, sentiment_index

KIND_RETURN = "return"
KIND_SENTIMENT = "sentiment"
KIND_NEGATIVE_COUNT = "negative_count"
KIND_BAR = "bar"

_SESSION_SHORT = {
    Session.PRE_MARKET: "pre",
    Session.INTRA_MARKET: "intra",
    Session.POST_MARKET: "post",
    Session.FULL_DAY: "full",
}
_SHORT_SESSION = {v: k for k, v in _SESSION_SHORT.items()}

_BAR_FIELD_NAMES = {
    "open": "Open",
    "high": "High",
    "low": "Low",
    "close": "Close",
    "volume": "Volume",
    "trade_value": "TradeValue",
}
_NAME_BAR_FIELDS = {v: k for k, v in _BAR_FIELD_NAMES.items()}


@dataclass(frozen=True)
class FeatureSpec:
    """One matrix column. session applies to sentiment, field to bar kinds."""

    kind: str
    lag: int
    session: Session | None = None
    field: str | None = None

    def __post_init__(self):
        if self.kind == KIND_RETURN:
            if self.lag < 1:
                raise ValueError("return features need lag >= 1")
        elif self.kind == KIND_SENTIMENT:
            if self.session is None:
                raise ValueError("sentiment features need a session")
            min_lag = 0 if self.session == Session.PRE_MARKET else 1
            if self.lag < min_lag:
                raise ValueError(
                    f"lag {self.lag} looks ahead for session {self.session}"
                )
        elif self.kind == KIND_NEGATIVE_COUNT:
            if self.lag < 1:
                raise ValueError("negative-count features need lag >= 1")
        elif self.kind == KIND_BAR:
            if self.field not in _BAR_FIELD_NAMES:
                raise ValueError(f"unknown bar field {self.field!r}")
            if self.lag < 1:
                raise ValueError("bar features need lag >= 1")
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")

    @property
    def name(self) -> str:
        if self.kind == KIND_RETURN:
            return f"R[t-{self.lag}]"
        if self.kind == KIND_SENTIMENT:
            return f"S_{_SESSION_SHORT[self.session]}[t-{self.lag}]"
        if self.kind == KIND_NEGATIVE_COUNT:
            return f"N[t-{self.lag}]"
        return f"{_BAR_FIELD_NAMES[self.field]}[t-{self.lag}]"


_NAME_RE = re.compile(r"^(R|S_(pre|intra|post|full)|N|[A-Za-z]+)\[t-(\d+)\]$")


def parse_spec(name: str) -> FeatureSpec:
    """Inverse of FeatureSpec.name."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ValueError(f"unparsable feature name {name!r}")
    head, session_short, lag_str = m.group(1), m.group(2), m.group(3)
    lag = int(lag_str)
    if head == "R":
        return FeatureSpec(KIND_RETURN, lag)
    if session_short is not None:
        return FeatureSpec(KIND_SENTIMENT, lag,
                           session=_SHORT_SESSION[session_short])
    if head == "N":
        return FeatureSpec(KIND_NEGATIVE_COUNT, lag)
    if head in _NAME_BAR_FIELDS:
        return FeatureSpec(KIND_BAR, lag, field=_NAME_BAR_FIELDS[head])
    raise ValueError(f"unparsable feature name {name!r}")


def _bar_specs(lag=1):
    return tuple(
        FeatureSpec(KIND_BAR, lag, field=f)
        for f in ("open", "close", "high", "low", "volume", "trade_value")
    )


LITERATURE_SET = (
    FeatureSpec(KIND_RETURN, 1),
    FeatureSpec(KIND_SENTIMENT, 0, session=Session.PRE_MARKET),
    FeatureSpec(KIND_SENTIMENT, 1, session=Session.INTRA_MARKET),
    FeatureSpec(KIND_SENTIMENT, 1, session=Session.POST_MARKET),
) + _bar_specs()

BORFE2_SET = (
    FeatureSpec(KIND_RETURN, 1),
    FeatureSpec(KIND_SENTIMENT, 0, session=Session.PRE_MARKET),
)

BORFE5_SET = (
    FeatureSpec(KIND_RETURN, 1),
    FeatureSpec(KIND_SENTIMENT, 0, session=Session.PRE_MARKET),
    FeatureSpec(KIND_SENTIMENT, 7, session=Session.INTRA_MARKET),
    FeatureSpec(KIND_SENTIMENT, 7, session=Session.POST_MARKET),
    FeatureSpec(KIND_NEGATIVE_COUNT, 7),
)


def sentiment_kind_count(specs) -> int:
    """How many columns come from the tweet stream (indices plus counts)."""
    return sum(
        1 for s in specs if s.kind in (KIND_SENTIMENT, KIND_NEGATIVE_COUNT)
    )


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows are grid days with all referenced history available.

    y holds direction labels of the row's day; returns the raw return;
    trading whether it was a real bar day. Non-trading rows stay in the
    matrix (they carry lag information and training labels) but are excluded
    from trade accounting downstream.
    """

    dates: tuple
    names: tuple
    X: np.ndarray
    y: np.ndarray
    returns: np.ndarray
    trading: np.ndarray

    def __post_init__(self):
        n = len(self.dates)
        if not (self.X.shape[0] == n == self.y.shape[0]
                == self.returns.shape[0] == self.trading.shape[0]):
            raise ValueError("matrix arrays must align")
        if self.X.shape[1] != len(self.names):
            raise ValueError("column names must match X width")

    def index_of(self, d: date) -> int:
        offset = (d - self.dates[0]).days
        if offset < 0 or offset >= len(self.dates) or self.dates[offset] != d:
            raise KeyError(d)
        return offset


def build_matrix(returns: ReturnSeries, bars, counts, specs,
                 span=None) -> FeatureMatrix:
    """Assemble the supervised matrix for the given feature specs.

    Args:
        returns: aligned-grid return series (labels and return targets).
        bars: aligned-grid DailyBar list (source for bar features).
        counts: SessionCounts rows covering the grid (source for sentiment
            and negative-count features).
        specs: FeatureSpec sequence; column order is preserved.
        span: optional (first, last) date pair restricting rows. Without it,
            rows start at the first day whose every lag is available.

    Returns:
        FeatureMatrix with one row per eligible day.

    Raises:
        SpanTooShort: no eligible rows.
        MissingReturn: an explicit span includes a day with no return value.
        MalformedRecord: a lag reference falls on a day the inputs do not
            cover (only possible with an explicit span).
    """
    specs = tuple(specs)
    if not specs:
        raise ValueError("need at least one feature spec")
    bar_by_date = {b.date: b for b in bars}
    count_by_key = counts_lookup(counts)
    ret_dates = set(returns.dates)

    def cell(spec: FeatureSpec, day: date):
        ref = day - timedelta(days=spec.lag)
        if spec.kind == KIND_RETURN:
            if ref not in ret_dates:
                return None
            return returns.value_at(ref)
        if spec.kind == KIND_SENTIMENT:
            c = count_by_key.get((ref, spec.session))
            if c is None:
                return None
            return sentiment_index(c).score
        if spec.kind == KIND_NEGATIVE_COUNT:
            c = count_by_key.get((ref, Session.FULL_DAY))
            if c is None:
                return None
            return float(c.negative)
        bar = bar_by_date.get(ref)
        if bar is None:
            return None
        return float(getattr(bar, spec.field))

    if span is None:
        candidates = returns.dates
        explicit = False
    else:
        first, last = span
        candidates = [first + timedelta(days=i)
                      for i in range((last - first).days + 1)]
        explicit = True

    rows, dates = [], []
    row_y, row_ret, row_trading = [], [], []
    for day in candidates:
        if day not in ret_dates:
            if explicit:
                raise MissingReturn(f"no return available for {day}")
            continue
        values = [cell(spec, day) for spec in specs]
        if any(v is None for v in values):
            if explicit:
                missing = specs[values.index(None)]
                raise MalformedRecord(
                    0, f"feature {missing.name} unavailable on {day}"
                )
            continue
        rows.append(values)
        dates.append(day)
        r = returns.value_at(day)
        row_ret.append(r)
        row_y.append(1 if r >= 0 else -1)
        row_trading.append(returns.trading_at(day))
    if not rows:
        raise SpanTooShort("no rows with full lag coverage")
    return FeatureMatrix(
        dates=tuple(dates),
        names=tuple(s.name for s in specs),
        X=np.array(rows, dtype=float),
        y=np.array(row_y, dtype=np.int64),
        returns=np.array(row_ret, dtype=float),
        trading=np.array(row_trading, dtype=bool),
    )


def split_matrix(matrix: FeatureMatrix, fraction: float):
    """Chronological split; boundary at floor(n * fraction).

    Raises:
        ValueError: fraction outside (0, 1).
        SpanTooShort: either side would be empty.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction {fraction} outside (0, 1)")
    n = len(matrix.dates)
    cut = int(n * fraction)
    if cut == 0 or cut == n:
        raise SpanTooShort(f"split at {cut}/{n} leaves an empty side")
    return slice_rows(matrix, 0, cut), slice_rows(matrix, cut, n)


def slice_rows(matrix: FeatureMatrix, start: int, stop: int) -> FeatureMatrix:
    return FeatureMatrix(
        dates=matrix.dates[start:stop],
        names=matrix.names,
        X=matrix.X[start:stop],
        y=matrix.y[start:stop],
        returns=matrix.returns[start:stop],
        trading=matrix.trading[start:stop],
    )


def select_columns(matrix: FeatureMatrix, indices) -> FeatureMatrix:
    indices = list(indices)
    return FeatureMatrix(
        dates=matrix.dates,
        names=tuple(matrix.names[i] for i in indices),
        X=matrix.X[:, indices],
        y=matrix.y,
        returns=matrix.returns,
        trading=matrix.trading,
    )


def write_matrix(matrix: FeatureMatrix, path) -> None:
    """CSV with date,y,return,trading then one column per feature."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "y", "return", "trading", *matrix.names])
        for i, day in enumerate(matrix.dates):
            writer.writerow(
                [day.isoformat(), int(matrix.y[i]), repr(float(matrix.returns[i])),
                 int(matrix.trading[i]),
                 *(repr(float(v)) for v in matrix.X[i])]
            )


def read_matrix(path) -> FeatureMatrix:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRecord(1, "empty matrix file") from None
        if header[:4] != ["date", "y", "return", "trading"]:
            raise MalformedRecord(1, f"unexpected matrix header {header!r}")
        names = tuple(header[4:])
        dates, ys, rets, trades, rows = [], [], [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                dates.append(date.fromisoformat(row[0]))
                ys.append(int(row[1]))
                rets.append(float(row[2]))
                trades.append(bool(int(row[3])))
                rows.append([float(v) for v in row[4:]])
            except ValueError:
                raise MalformedRecord(line_no, f"bad matrix row {row!r}") from None
    return FeatureMatrix(
        dates=tuple(dates), names=names,
        X=np.array(rows, dtype=float).reshape(len(rows), len(names)),
        y=np.array(ys, dtype=np.int64),
        returns=np.array(rets, dtype=float),
        trading=np.array(trades, dtype=bool),
    )
