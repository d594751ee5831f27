"""Labeled tweet streams to per-session sentiment counts and indices.

A trading day splits into three sessions on exchange-local wall time:
pre-market [00:00, 09:30), intra-market [09:30, 16:00) and post-market
[16:00, 24:00), plus a full-day aggregate. The sentiment index of a bucket
is (positive - negative) / total; an empty bucket gets index 0 and an
imputed flag. Weekend and holiday tweets stay on their own calendar day.
"""

import csv
import re
from dataclasses import dataclass, replace
from datetime import date, datetime, time, timedelta, timezone
from enum import Enum
from pathlib import Path

from .errors import MalformedRecord, UnlabeledText

EXCHANGE_TZ = timezone(timedelta(hours=-5))

_INTRA_OPEN = time(9, 30)
_INTRA_CLOSE = time(16, 0)


class SentimentLabel(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


class Session(Enum):
    PRE_MARKET = "pre_market"
    INTRA_MARKET = "intra_market"
    POST_MARKET = "post_market"
    FULL_DAY = "full_day"


SESSION_ORDER = (
    Session.PRE_MARKET,
    Session.INTRA_MARKET,
    Session.POST_MARKET,
    Session.FULL_DAY,
)


@dataclass(frozen=True)
class TweetRecord:
    timestamp: datetime
    text: str
    label: SentimentLabel | None = None


@dataclass(frozen=True)
class SessionCounts:
    """Label counts for one (date, session) bucket."""

    date: date
    session: Session
    positive: int
    negative: int
    neutral: int

    @property
    def total(self) -> int:
        return self.positive + self.negative + self.neutral


@dataclass(frozen=True)
class SentimentIndex:
    """Index value for one bucket; imputed means the bucket was empty."""

    date: date
    session: Session
    score: float
    total: int
    imputed: bool


def parse_tweets(path) -> list:
    """Read a tweet CSV into TweetRecord rows.

    Header is timestamp,text,label (label column optional; empty label cells
    mean unlabeled). Timestamps must be ISO-8601 with a UTC offset; a bare
    trailing Z is accepted.

    Raises:
        MalformedRecord: bad header, bad timestamp, naive timestamp, or an
            unknown label value; message carries the 1-based line number.
    """
    path = Path(path)
    tweets = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise MalformedRecord(1, "empty tweet file") from None
        if header not in (["timestamp", "text"], ["timestamp", "text", "label"]):
            raise MalformedRecord(1, f"unexpected tweet header {header!r}")
        has_label = len(header) == 3
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise MalformedRecord(
                    line_no, f"expected {len(header)} columns, got {len(row)}"
                )
            raw_ts = row[0].strip()
            if raw_ts.endswith(("Z", "z")):
                raw_ts = raw_ts[:-1] + "+00:00"
            try:
                ts = datetime.fromisoformat(raw_ts)
            except ValueError:
                raise MalformedRecord(
                    line_no, f"bad timestamp {row[0]!r}"
                ) from None
            if ts.tzinfo is None:
                raise MalformedRecord(
                    line_no, f"timestamp {row[0]!r} lacks a UTC offset"
                )
            label = None
            if has_label and row[2].strip():
                try:
                    label = SentimentLabel(row[2].strip().lower())
                except ValueError:
                    raise MalformedRecord(
                        line_no, f"unknown label {row[2]!r}"
                    ) from None
            tweets.append(TweetRecord(timestamp=ts, text=row[1], label=label))
    return tweets


_WORD_RE = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class LexiconLabeler:
    """Word-list labeler: positive-only hits -> POSITIVE, negative-only ->
    NEGATIVE, mixed or no hits -> NEUTRAL."""

    positive: frozenset
    negative: frozenset

    def __call__(self, tweet: TweetRecord) -> SentimentLabel:
        tokens = set(_WORD_RE.findall(tweet.text.lower()))
        has_pos = bool(tokens & self.positive)
        has_neg = bool(tokens & self.negative)
        if has_pos and not has_neg:
            return SentimentLabel.POSITIVE
        if has_neg and not has_pos:
            return SentimentLabel.NEGATIVE
        return SentimentLabel.NEUTRAL


def label_tweets(tweets, labeler=None) -> list:
    """Fill in missing labels; already-labeled tweets pass through.

    Raises:
        UnlabeledText: a tweet has no label and no labeler was given.
    """
    out = []
    for idx, tweet in enumerate(tweets):
        if tweet.label is not None:
            out.append(tweet)
            continue
        if labeler is None:
            raise UnlabeledText(
                f"tweet {idx} at {tweet.timestamp.isoformat()} has no label"
            )
        out.append(replace(tweet, label=labeler(tweet)))
    return out


def bucket_session(ts: datetime, exchange_tz=EXCHANGE_TZ):
    """Assign a timestamp to its exchange-local (date, session) bucket."""
    local = ts.astimezone(exchange_tz)
    t = local.time()
    if t < _INTRA_OPEN:
        session = Session.PRE_MARKET
    elif t < _INTRA_CLOSE:
        session = Session.INTRA_MARKET
    else:
        session = Session.POST_MARKET
    return local.date(), session


def daily_counts(tweets, span, exchange_tz=EXCHANGE_TZ) -> list:
    """Count labels per (date, session) over every day of the span.

    Emits one SessionCounts per (day, session) including empty buckets, with
    the three sessions followed by the full-day aggregate, days ascending.
    Tweets outside the span are dropped. Unlabeled tweets must not reach
    this point (run label_tweets first).
    """
    start, end = span
    buckets = {}
    day = start
    while day <= end:
        for session in SESSION_ORDER:
            buckets[(day, session)] = [0, 0, 0]
        day += timedelta(days=1)
    slot = {
        SentimentLabel.POSITIVE: 0,
        SentimentLabel.NEGATIVE: 1,
        SentimentLabel.NEUTRAL: 2,
    }
    for tweet in tweets:
        if tweet.label is None:
            raise UnlabeledText(
                f"tweet at {tweet.timestamp.isoformat()} has no label"
            )
        day, session = bucket_session(tweet.timestamp, exchange_tz)
        if day < start or day > end:
            continue
        idx = slot[tweet.label]
        buckets[(day, session)][idx] += 1
        buckets[(day, Session.FULL_DAY)][idx] += 1
    out = []
    day = start
    while day <= end:
        for session in SESSION_ORDER:
            p, n, neu = buckets[(day, session)]
            out.append(SessionCounts(day, session, p, n, neu))
        day += timedelta(days=1)
    return out


def sentiment_index(counts: SessionCounts) -> SentimentIndex:
    """(positive - negative) / total; empty bucket -> 0.0 with imputed set."""
    t = counts.total
    if t == 0:
        return SentimentIndex(counts.date, counts.session, 0.0, 0, True)
    score = (counts.positive - counts.negative) / t
    return SentimentIndex(counts.date, counts.session, score, t, False)


def compute_indices(counts) -> list:
    return [sentiment_index(c) for c in counts]


def write_counts(counts, path) -> None:
    """Write the combined counts-and-index table.

    Columns: date,session,P,N,n,T,S,imputed. S is recomputed on read, so the
    round trip is exact.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "session", "P", "N", "n", "T", "S", "imputed"])
        for c in counts:
            idx = sentiment_index(c)
            writer.writerow(
                [c.date.isoformat(), c.session.value, c.positive, c.negative,
                 c.neutral, c.total, repr(idx.score), int(idx.imputed)]
            )


def parse_counts(path) -> list:
    """Read a counts table written by write_counts back into SessionCounts."""
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRecord(1, "empty counts file") from None
        if [h.strip() for h in header] != ["date", "session", "P", "N", "n",
                                           "T", "S", "imputed"]:
            raise MalformedRecord(1, f"unexpected counts header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                day = date.fromisoformat(row[0].strip())
                session = Session(row[1].strip())
                p, n, neu = int(row[2]), int(row[3]), int(row[4])
            except ValueError:
                raise MalformedRecord(line_no, f"bad counts row {row!r}") from None
            if p < 0 or n < 0 or neu < 0:
                raise MalformedRecord(line_no, "negative count")
            out.append(SessionCounts(day, session, p, n, neu))
    return out


def counts_lookup(counts) -> dict:
    """Index SessionCounts rows by (date, session) for feature assembly."""
    return {(c.date, c.session): c for c in counts}
