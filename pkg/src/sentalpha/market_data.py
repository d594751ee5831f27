"""Daily bar ingestion, calendar alignment and simple returns.

Bars arrive on trading days only. Downstream lag features are defined on a
7-day calendar grid, so missing days (weekends, holidays) are filled by
linear interpolation between the neighboring real bars and flagged. Returns
are simple close-to-close; the sign label for a zero return is +1.
"""

import csv
from dataclasses import dataclass, replace
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import (
    GapTooWide,
    MalformedRecord,
    NonMonotonicDates,
    SpanTooShort,
    ZeroPrice,
)

MAX_GAP_DAYS = 4

BAR_FIELDS = ("open", "high", "low", "close", "volume", "trade_value")


@dataclass(frozen=True)
class DailyBar:
    """One day of OHLCV data.

    interpolated marks calendar-fill rows that had no real bar; those days
    are excluded from trade accounting but participate in lag features.
    """

    date: date
    open: float
    high: float
    low: float
    close: float
    volume: float
    trade_value: float
    interpolated: bool = False


@dataclass(frozen=True)
class ReturnSeries:
    """Close-to-close simple returns on the aligned calendar grid.

    dates[i] is the day whose return is values[i]; the first grid day has no
    return. trading[i] is True when dates[i] had a real (non-interpolated)
    bar.
    """

    dates: tuple
    values: np.ndarray
    trading: np.ndarray

    def __post_init__(self):
        if not (len(self.dates) == len(self.values) == len(self.trading)):
            raise ValueError("dates, values and trading must align")

    def index_of(self, d: date) -> int:
        offset = (d - self.dates[0]).days
        if offset < 0 or offset >= len(self.dates) or self.dates[offset] != d:
            raise KeyError(d)
        return offset

    def value_at(self, d: date) -> float:
        return float(self.values[self.index_of(d)])

    def trading_at(self, d: date) -> bool:
        return bool(self.trading[self.index_of(d)])

    def labels(self) -> np.ndarray:
        return sign_labels(self.values)


def sign_labels(values) -> np.ndarray:
    """Map returns to direction labels in {-1, +1}; zero maps to +1."""
    arr = np.asarray(values, dtype=float)
    return np.where(arr >= 0.0, 1, -1).astype(np.int64)


def _parse_float(raw: str, column: str, line_no: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise MalformedRecord(line_no, f"bad {column} value {raw!r}") from None
    if not np.isfinite(value):
        raise MalformedRecord(line_no, f"non-finite {column} value {raw!r}")
    return value


def parse_bars(path) -> list:
    """Read a daily-bar CSV into DailyBar rows.

    Header must be date,open,high,low,close,volume with trade_value optional;
    a missing trade_value column defaults to close * volume. Rows must be
    strictly increasing in date.

    Args:
        path: CSV file path.

    Returns:
        list[DailyBar] with interpolated=False.

    Raises:
        MalformedRecord: unparsable row, bad header, or invariant violation
            (low > min(open, close), high < max(open, close), negative
            volume or trade_value); the message carries the 1-based line.
        NonMonotonicDates: dates out of order or duplicated.
    """
    path = Path(path)
    bars = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRecord(1, "empty bar file") from None
        header = [h.strip().lower() for h in header]
        base = list(BAR_FIELDS[:-1])
        if header != ["date"] + base and header != ["date"] + list(BAR_FIELDS):
            raise MalformedRecord(1, f"unexpected bar header {header!r}")
        has_tv = header[-1] == "trade_value"
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise MalformedRecord(
                    line_no, f"expected {len(header)} columns, got {len(row)}"
                )
            try:
                day = date.fromisoformat(row[0].strip())
            except ValueError:
                raise MalformedRecord(
                    line_no, f"bad date value {row[0]!r}"
                ) from None
            o = _parse_float(row[1], "open", line_no)
            h = _parse_float(row[2], "high", line_no)
            lo = _parse_float(row[3], "low", line_no)
            c = _parse_float(row[4], "close", line_no)
            v = _parse_float(row[5], "volume", line_no)
            tv = _parse_float(row[6], "trade_value", line_no) if has_tv else c * v
            if lo > min(o, c):
                raise MalformedRecord(line_no, "low above open/close")
            if h < max(o, c):
                raise MalformedRecord(line_no, "high below open/close")
            if v < 0:
                raise MalformedRecord(line_no, "negative volume")
            if tv < 0:
                raise MalformedRecord(line_no, "negative trade_value")
            if bars and day <= bars[-1].date:
                raise NonMonotonicDates(
                    f"bar date {day} not after {bars[-1].date} (line {line_no})"
                )
            bars.append(DailyBar(day, o, h, lo, c, v, tv))
    if not bars:
        raise MalformedRecord(2, "bar file has no data rows")
    return bars


def align_calendar(bars, max_gap: int = MAX_GAP_DAYS) -> list:
    """Fill the 7-day calendar grid between the first and last bar.

    Missing days get all numeric fields linearly interpolated between the
    nearest present bars and interpolated=True. Present bars pass through
    unchanged, which makes the operation idempotent.

    Raises:
        GapTooWide: more than max_gap consecutive days are missing.
        SpanTooShort: fewer than two bars.
    """
    if len(bars) < 2:
        raise SpanTooShort("need at least two bars to build a calendar grid")
    by_date = {b.date: b for b in bars}
    grid = []
    day = bars[0].date
    prev_real = bars[0]
    next_idx = 0
    gap_run = 0
    while day <= bars[-1].date:
        bar = by_date.get(day)
        if bar is not None:
            grid.append(bar)
            prev_real = bar
            gap_run = 0
        else:
            gap_run += 1
            if gap_run > max_gap:
                raise GapTooWide(
                    f"{gap_run} consecutive days without bars ending {day}"
                )
            while bars[next_idx].date < day:
                next_idx += 1
            nxt = bars[next_idx]
            span = (nxt.date - prev_real.date).days
            w = (day - prev_real.date).days / span
            fields = {
                name: (1.0 - w) * getattr(prev_real, name) + w * getattr(nxt, name)
                for name in BAR_FIELDS
            }
            grid.append(DailyBar(date=day, interpolated=True, **fields))
        day += timedelta(days=1)
    return grid


def compute_returns(aligned) -> ReturnSeries:
    """Simple close-to-close returns over an aligned grid.

    Args:
        aligned: output of align_calendar (contiguous daily grid).

    Returns:
        ReturnSeries for aligned[1:].

    Raises:
        ZeroPrice: a denominator close is exactly zero.
        SpanTooShort: fewer than two grid days.
    """
    if len(aligned) < 2:
        raise SpanTooShort("need at least two grid days for returns")
    closes = np.array([b.close for b in aligned], dtype=float)
    if np.any(closes[:-1] == 0.0):
        bad = aligned[int(np.argmax(closes[:-1] == 0.0))].date
        raise ZeroPrice(f"close price is zero on {bad}")
    values = closes[1:] / closes[:-1] - 1.0
    dates = tuple(b.date for b in aligned[1:])
    trading = np.array([not b.interpolated for b in aligned[1:]], dtype=bool)
    return ReturnSeries(dates=dates, values=values, trading=trading)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_aligned(aligned, returns: ReturnSeries, path) -> None:
    """Write the aligned grid with interpolated and return columns appended.

    The return cell of the first grid day is empty. Floats are written with
    repr so a round-trip is bit-exact.
    """
    path = Path(path)
    ret_by_date = {d: v for d, v in zip(returns.dates, returns.values)}
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["date", "open", "high", "low", "close", "volume", "trade_value",
             "interpolated", "return"]
        )
        for bar in aligned:
            r = ret_by_date.get(bar.date)
            writer.writerow(
                [bar.date.isoformat(), _fmt(bar.open), _fmt(bar.high),
                 _fmt(bar.low), _fmt(bar.close), _fmt(bar.volume),
                 _fmt(bar.trade_value), int(bar.interpolated),
                 "" if r is None else _fmt(r)]
            )


def write_bars(bars, path) -> None:
    """Write bars in the input format (no interpolated/return columns)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "open", "high", "low", "close", "volume",
                         "trade_value"])
        for bar in bars:
            writer.writerow(
                [bar.date.isoformat(), _fmt(bar.open), _fmt(bar.high),
                 _fmt(bar.low), _fmt(bar.close), _fmt(bar.volume),
                 _fmt(bar.trade_value)]
            )


def parse_aligned(path):
    """Read a write_aligned file back into (grid bars, ReturnSeries)."""
    path = Path(path)
    bars = []
    ret_vals = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRecord(1, "empty aligned-bar file") from None
        expected = ["date", "open", "high", "low", "close", "volume",
                    "trade_value", "interpolated", "return"]
        if [h.strip().lower() for h in header] != expected:
            raise MalformedRecord(1, f"unexpected aligned header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 9:
                raise MalformedRecord(line_no, f"expected 9 columns, got {len(row)}")
            try:
                day = date.fromisoformat(row[0].strip())
                fields = [float(v) for v in row[1:7]]
                interp = bool(int(row[7]))
            except ValueError:
                raise MalformedRecord(
                    line_no, f"bad aligned row {row!r}"
                ) from None
            if bars and (day - bars[-1].date).days != 1:
                raise NonMonotonicDates(
                    f"aligned grid must be contiguous; {day} after {bars[-1].date}"
                )
            bars.append(DailyBar(day, *fields, interpolated=interp))
            ret_vals.append(row[8].strip())
    if len(bars) < 2:
        raise SpanTooShort("aligned file has fewer than two grid days")
    values = []
    for i, raw in enumerate(ret_vals):
        if i == 0:
            continue
        if not raw:
            raise MalformedRecord(i + 2, "missing return value")
        values.append(float(raw))
    return bars, ReturnSeries(
        dates=tuple(b.date for b in bars[1:]),
        values=np.array(values, dtype=float),
        trading=np.array([not b.interpolated for b in bars[1:]], dtype=bool),
    )


def strip_interpolated(aligned) -> list:
    """Real (trading-day) bars only, flags reset."""
    return [replace(b, interpolated=False) for b in aligned if not b.interpolated]
