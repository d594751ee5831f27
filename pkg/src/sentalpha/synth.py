"""Synthetic market-plus-tweets datasets with planted, recoverable signal.

The generator works on a full calendar grid that starts on a Monday; weekdays
are trading days. Per-day latent channels drive both the tweet stream and the
return path:

  z_pre, z_intra, z_post  iid N(0,1), one value per grid day,
  z_neg[t] = amplitude * cos(2*pi*t/7) + N(0,1)   (weekly cycle),

and the return innovation is built sequentially so an R[t-1] weight feeds
back the previous day's innovation:

  g[t] = sum_f w_f * channel_f[t - lag_f] + w_R * g[t-1] + noise * eps[t],
  r[t] = r_scale * g[t].

Session sentiment balance is tanh(slope * z_session); the non-neutral tweet
fraction is modulated by z_neg, which plants the weekly cycle in negative
counts without flipping index signs. Planted weights are keyed by canonical
feature names, so the ground truth states exactly which matrix columns carry
signal. The Bayes accuracy estimate is the fraction of days whose return
sign survives removing the noise term.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from pathlib import Path

import numpy as np

from .errors import SpanTooShort
from .features import parse_spec
from .market_data import DailyBar, sign_labels
from .rng import substream
from .sentiment import EXCHANGE_TZ, SentimentLabel, TweetRecord

MIN_DAYS = 60

DEFAULT_WEIGHTS = {
    "R[t-1]": 0.35,
    "S_pre[t-0]": 0.8,
    "S_intra[t-7]": 0.55,
    "S_post[t-7]": 0.55,
    "N[t-7]": 0.5,
}

_SESSION_SPLIT = (0.25, 0.5, 0.25)
_BALANCE_SLOPE = 1.6
_Q_SLOPE = 0.9

_SESSION_WINDOWS = {
    "pre": (0.0, 9.5 * 3600.0),
    "intra": (9.5 * 3600.0, 16.0 * 3600.0),
    "post": (16.0 * 3600.0, 24.0 * 3600.0),
}


@dataclass(frozen=True)
class SynthConfig:
    n_days: int = 730
    seed: int = 0
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    noise_level: float = 0.8
    seasonality_amplitude: float = 0.6
    neutral_fraction: float = 0.8
    tweet_volume: tuple = (120, 260)
    r_scale: float = 0.012
    start: date = date(2024, 1, 1)

    def __post_init__(self):
        if self.n_days < MIN_DAYS:
            raise SpanTooShort(f"n_days {self.n_days} below minimum {MIN_DAYS}")
        if self.start.weekday() != 0:
            raise ValueError("grid must start on a Monday")
        if not 0.0 <= self.neutral_fraction < 1.0:
            raise ValueError("neutral_fraction must be in [0, 1)")
        lo, hi = self.tweet_volume
        if lo < 1 or hi < lo:
            raise ValueError(f"bad tweet_volume range {self.tweet_volume}")
        if self.noise_level < 0 or self.seasonality_amplitude < 0:
            raise ValueError("noise and seasonality must be non-negative")
        _weight_channels(self)  # reject unplantable names at construction


@dataclass(frozen=True)
class GroundTruth:
    weights: dict
    noise_level: float
    seasonality_amplitude: float
    neutral_fraction: float
    bayes_accuracy: float
    seed: int
    n_days: int
    start: date
    end: date

    def to_dict(self) -> dict:
        return {
            "weights": dict(self.weights),
            "noise_level": self.noise_level,
            "seasonality_amplitude": self.seasonality_amplitude,
            "neutral_fraction": self.neutral_fraction,
            "bayes_accuracy": self.bayes_accuracy,
            "seed": self.seed,
            "n_days": self.n_days,
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
        }


@dataclass(frozen=True)
class SynthResult:
    bars: list
    tweets: list
    truth: GroundTruth


def _channel_series(config: SynthConfig, n: int) -> dict:
    amp = config.seasonality_amplitude
    out = {
        "pre": substream(config.seed, "latent", "pre").standard_normal(n),
        "intra": substream(config.seed, "latent", "intra").standard_normal(n),
        "post": substream(config.seed, "latent", "post").standard_normal(n),
    }
    eta = substream(config.seed, "latent", "neg").standard_normal(n)
    idx = np.arange(n)
    out["neg"] = amp * np.cos(2.0 * math.pi * idx / 7.0) + eta
    return out


def _weight_channels(config: SynthConfig) -> list:
    """(channel key, lag, weight) triples; channel None means R[t-1]."""
    triples = []
    for name, w in config.weights.items():
        spec = parse_spec(name)
        if spec.kind == "return":
            if spec.lag != 1:
                raise ValueError("return feedback is supported at lag 1 only")
            triples.append((None, 1, float(w)))
        elif spec.kind == "sentiment":
            short = {"pre_market": "pre", "intra_market": "intra",
                     "post_market": "post"}.get(spec.session.value)
            if short is None:
                raise ValueError(f"cannot plant full-day sentiment {name!r}")
            triples.append((short, spec.lag, float(w)))
        elif spec.kind == "negative_count":
            triples.append(("neg", spec.lag, float(w)))
        else:
            raise ValueError(f"cannot plant bar feature {name!r}")
    return triples


def generate(config: SynthConfig) -> SynthResult:
    """Build one dataset: trading-day bars, labeled tweets, ground truth."""
    n = config.n_days
    days = [config.start + timedelta(days=i) for i in range(n)]
    channels = _channel_series(config, n)
    triples = _weight_channels(config)
    eps = substream(config.seed, "latent", "resid").standard_normal(n)

    g = np.zeros(n)
    signal = np.zeros(n)
    for i in range(n):
        s = 0.0
        for key, lag, w in triples:
            if key is None:
                if i >= 1:
                    s += w * g[i - 1]
            elif i >= lag:
                s += w * channels[key][i - lag]
        signal[i] = s
        g[i] = s + config.noise_level * eps[i]
    r = config.r_scale * np.clip(g, -25.0, 25.0)
    bayes_accuracy = float(
        np.mean(sign_labels(r[1:]) == sign_labels(signal[1:]))
    )

    closes = np.empty(n)
    closes[0] = 100.0
    for i in range(1, n):
        closes[i] = closes[i - 1] * (1.0 + r[i])

    bars = []
    for i, day in enumerate(days):
        if day.weekday() >= 5:
            continue
        rng = substream(config.seed, "bars", i)
        prev_close = closes[i - 1] if i else closes[0]
        o = prev_close * (1.0 + 0.25 * config.r_scale * rng.standard_normal())
        c = closes[i]
        h = max(o, c) * (1.0 + abs(rng.standard_normal()) * 0.3 * config.r_scale)
        lo = min(o, c) * (1.0 - abs(rng.standard_normal()) * 0.3 * config.r_scale)
        volume = float(np.round(np.exp(rng.standard_normal() * 0.35) * 1e6))
        trade_value = c * volume * rng.uniform(0.98, 1.02)
        bars.append(DailyBar(date=day, open=o, high=h, low=lo, close=c,
                             volume=volume, trade_value=trade_value))

    base_q = 1.0 - config.neutral_fraction
    vmin, vmax = config.tweet_volume
    tweets = []
    for i, day in enumerate(days):
        rng = substream(config.seed, "tweets", i)
        total = int(rng.integers(vmin, vmax + 1))
        per_session = rng.multinomial(total, _SESSION_SPLIT)
        q = base_q * (1.0 + 0.5 * math.tanh(_Q_SLOPE * channels["neg"][i]))
        q = min(max(q, 0.01), 0.95)
        day_rows = []
        for short, count in zip(("pre", "intra", "post"), per_session):
            if count == 0:
                continue
            balance = math.tanh(_BALANCE_SLOPE * channels[short][i])
            n_opinion = int(rng.binomial(count, q))
            n_pos = int(rng.binomial(n_opinion, (1.0 + balance) / 2.0))
            n_neg = n_opinion - n_pos
            n_neu = count - n_opinion
            lo_s, hi_s = _SESSION_WINDOWS[short]
            seconds = rng.uniform(lo_s, hi_s, size=count)
            seconds.sort()
            labels = (
                [SentimentLabel.POSITIVE] * n_pos
                + [SentimentLabel.NEGATIVE] * n_neg
                + [SentimentLabel.NEUTRAL] * n_neu
            )
            order = rng.permutation(count)
            for j in range(count):
                ts = datetime.combine(day, time(0), EXCHANGE_TZ) + timedelta(
                    seconds=float(seconds[j])
                )
                label = labels[int(order[j])]
                day_rows.append(TweetRecord(
                    timestamp=ts,
                    text=f"synthetic {label.value} note {i}-{short}-{j}",
                    label=label,
                ))
        tweets.extend(day_rows)

    truth = GroundTruth(
        weights=dict(config.weights),
        noise_level=config.noise_level,
        seasonality_amplitude=config.seasonality_amplitude,
        neutral_fraction=config.neutral_fraction,
        bayes_accuracy=bayes_accuracy,
        seed=config.seed,
        n_days=n,
        start=days[0],
        end=days[-1],
    )
    return SynthResult(bars=bars, tweets=tweets, truth=truth)


def planted_matrix(n_rows: int, n_features: int, informative: dict,
                   noise: float, seed: int):
    """Plain supervised matrix with linear signal in chosen columns.

    Args:
        n_rows, n_features: matrix shape.
        informative: column index -> weight.
        noise: std of the additive noise on the decision margin.
        seed: substream seed.

    Returns:
        (X, y) with X iid standard normal and y the sign of the weighted
        margin plus noise (zero margin labels +1).
    """
    if not all(0 <= int(k) < n_features for k in informative):
        raise ValueError("informative indices out of range")
    rng = substream(seed, "planted")
    X = rng.standard_normal((n_rows, n_features))
    margin = np.zeros(n_rows)
    for k, w in informative.items():
        margin += float(w) * X[:, int(k)]
    margin += noise * rng.standard_normal(n_rows)
    return X, sign_labels(margin)


def write_ground_truth(truth: GroundTruth, path) -> None:
    Path(path).write_text(
        json.dumps(truth.to_dict(), indent=2, sort_keys=True) + "\n"
    )


def write_tweets(tweets, path) -> None:
    """Tweet CSV in the ingestion format: timestamp,text,label."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "text", "label"])
        for t in tweets:
            writer.writerow([
                t.timestamp.isoformat(),
                t.text,
                "" if t.label is None else t.label.value,
            ])
