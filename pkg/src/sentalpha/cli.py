"""Command-line pipeline: ingest, analyze, select, backtest, synth.

Every subcommand writes into --out: its data files, any figures (each backed
by a CSV of the plotted numbers), and exactly one manifest.json recording the
resolved configuration, input digests and output names. Parameter resolution
order is defaults < --config JSON < explicit flags.

Exit codes: 0 success, 2 for malformed inputs or invalid configuration
(diagnostic on stderr), 1 for unexpected internal failures.
"""

import argparse
import csv
import json
import sys
import traceback
from datetime import date
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import (
    StrategyConfig,
    builtin_strategies,
    compare_strategies,
    write_batches,
    write_daily_report,
)
from .bo_rfe import BoRfeConfig, bo_rfe_run, read_selection, write_selection
from .correlation import acf, lagged_correlation, pearson, write_long_format
from .errors import ConstantSeries, SentalphaError, SpanTooShort
from .features import (
    BORFE2_SET,
    BORFE5_SET,
    LITERATURE_SET,
    build_matrix,
    parse_spec,
    sentiment_kind_count,
    slice_rows,
    split_matrix,
)
from .manifest import write_manifest
from .market_data import (
    align_calendar,
    compute_returns,
    parse_aligned,
    parse_bars,
    write_aligned,
    write_bars,
)
from .plotting import bar_plot, box_plot, line_plot
from .sentiment import (
    LexiconLabeler,
    Session,
    bucket_session,
    daily_counts,
    label_tweets,
    parse_counts,
    parse_tweets,
    write_counts,
)
from .synth import SynthConfig, generate, write_ground_truth, write_tweets

BASE_SETS = {
    "literature": LITERATURE_SET,
    "borfe2": BORFE2_SET,
    "borfe5": BORFE5_SET,
}


def _load_config_file(path):
    if path is None:
        return {}
    payload = json.loads(Path(path).read_text())
    if not isinstance(payload, dict):
        raise ValueError("--config must hold a JSON object")
    return payload


def _resolve(args, defaults: dict) -> dict:
    cfg = _load_config_file(args.config)
    resolved = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
        elif key in cfg:
            resolved[key] = cfg[key]
        else:
            resolved[key] = default
    return resolved


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_dataset(data_dir):
    data_dir = Path(data_dir)
    bars_path = data_dir / "aligned.csv"
    counts_path = data_dir / "sentiment.csv"
    bars, returns = parse_aligned(bars_path)
    counts = parse_counts(counts_path)
    return bars, returns, counts, {"aligned": bars_path, "sentiment": counts_path}


def cmd_ingest(args) -> int:
    resolved = _resolve(args, {"seed": 0})
    out = _out_dir(args)
    bars = parse_bars(args.bars)
    aligned = align_calendar(bars)
    returns = compute_returns(aligned)
    tweets = parse_tweets(args.tweets)
    labeler = None
    if args.lexicon:
        lex = json.loads(Path(args.lexicon).read_text())
        labeler = LexiconLabeler(
            positive=frozenset(w.lower() for w in lex.get("positive", ())),
            negative=frozenset(w.lower() for w in lex.get("negative", ())),
        )
    labeled = label_tweets(tweets, labeler)
    span = (aligned[0].date, aligned[-1].date)
    dropped = sum(
        1 for t in labeled
        if not span[0] <= bucket_session(t.timestamp)[0] <= span[1]
    )
    if dropped:
        print(
            f"note: {dropped} tweet(s) outside the bar span "
            f"{span[0]}..{span[1]} were dropped", file=sys.stderr,
        )
    counts = daily_counts(labeled, span)
    write_aligned(aligned, returns, out / "aligned.csv")
    write_counts(counts, out / "sentiment.csv")
    inputs = {"bars": args.bars, "tweets": args.tweets}
    if args.lexicon:
        inputs["lexicon"] = args.lexicon
    write_manifest(out, "ingest", resolved, resolved["seed"], inputs,
                   ["aligned.csv", "sentiment.csv"])
    print(f"ingest: {len(aligned)} grid days, {len(labeled)} tweets -> {out}")
    return 0


def cmd_analyze(args) -> int:
    resolved = _resolve(args, {"seed": 0, "max_lag": 30})
    max_lag = int(resolved["max_lag"])
    out = _out_dir(args)
    bars, returns, counts, inputs = _load_dataset(args.data)
    full = {c.date: c for c in counts if c.session == Session.FULL_DAY}
    grid_dates = [b.date for b in bars]
    n_full = np.array([full[d].negative for d in grid_dates], dtype=float)
    ret_dates = list(returns.dates)
    series = {
        "P": np.array([full[d].positive for d in ret_dates], dtype=float),
        "N": np.array([full[d].negative for d in ret_dates], dtype=float),
        "n": np.array([full[d].neutral for d in ret_dates], dtype=float),
    }
    targets = {
        "R": returns.values,
        "V": np.array([b.volume for b in bars[1:]], dtype=float),
    }
    rows = []
    for xname, xs in series.items():
        for yname, ys in targets.items():
            try:
                value = pearson(xs, ys)
            except ConstantSeries:
                value = None
            rows.append(("pairwise", xname, yname, 0, value))
    try:
        leadlag = lagged_correlation(series["N"], targets["R"], max_lag)
        leadlag_vals = [float(v) for v in leadlag]
    except ConstantSeries:
        leadlag_vals = [None] * (max_lag + 1)
    for lag, value in enumerate(leadlag_vals):
        rows.append(("lead_lag", "N", "R", lag, value))
    try:
        acf_vals = [float(v) for v in acf(n_full, max_lag)]
    except ConstantSeries:
        acf_vals = [None] * (max_lag + 1)
    for lag, value in enumerate(acf_vals):
        rows.append(("acf", "N", "N", lag, value))
    write_long_format(rows, out / "correlations.csv")
    outputs = ["correlations.csv"]
    lags = list(range(max_lag + 1))
    if all(v is not None for v in leadlag_vals):
        line_plot(out / "leadlag.svg",
                  "Negative counts leading returns",
                  [("corr", lags, leadlag_vals)],
                  x_label="lag (days)", y_label="Pearson r")
        outputs.append("leadlag.svg")
    if all(v is not None for v in acf_vals):
        bar_plot(out / "acf.svg", "Autocorrelation of negative counts",
                 lags, acf_vals, x_label="lag (days)", y_label="Pearson r")
        outputs.append("acf.svg")
    write_manifest(out, "analyze", resolved, resolved["seed"], inputs, outputs)
    undefined = sum(1 for r in rows if r[4] is None)
    if undefined:
        print(f"note: {undefined} correlation cell(s) undefined "
              f"(constant series)", file=sys.stderr)
    print(f"analyze: {len(rows)} correlation rows -> {out}")
    return 0


def cmd_select(args) -> int:
    defaults = {
        "seed": 0, "iterations": 50, "train_days": 222, "test_days": 30,
        "train_fraction": 0.84, "theta_min": 1, "theta_max": 100,
        "base_set": "literature",
    }
    resolved = _resolve(args, defaults)
    out = _out_dir(args)
    bars, returns, counts, inputs = _load_dataset(args.data)
    base = BASE_SETS.get(resolved["base_set"])
    if base is None:
        raise ValueError(f"unknown base set {resolved['base_set']!r}")
    matrix = build_matrix(returns, bars, counts, base)
    train_part, _ = split_matrix(matrix, float(resolved["train_fraction"]))
    need = int(resolved["train_days"]) + int(resolved["test_days"])
    n_train = len(train_part.dates)
    if n_train < need:
        raise SpanTooShort(
            f"selection needs {need} training rows, have {n_train}"
        )
    candidate = slice_rows(train_part, n_train - need, n_train)
    config = BoRfeConfig(
        iterations=int(resolved["iterations"]),
        train_days=int(resolved["train_days"]),
        test_days=int(resolved["test_days"]),
        theta_range=(int(resolved["theta_min"]), int(resolved["theta_max"])),
        seed=int(resolved["seed"]),
    )
    result = bo_rfe_run(candidate.X, candidate.y, matrix.names, config)
    write_selection(result, out / "selection.json")
    best_so_far = []
    best = -np.inf
    with (out / "selection_trace.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "gamma", "theta", "f1", "best_so_far", "features"])
        for e in result.evaluations:
            best = max(best, e.f1)
            best_so_far.append(best)
            writer.writerow([e.k, e.gamma, e.theta, repr(e.f1), repr(best),
                             ";".join(e.kept)])
    ks = [e.k for e in result.evaluations]
    line_plot(out / "selection_trace.svg", "Selection objective trace",
              [("F1", ks, [e.f1 for e in result.evaluations]),
               ("best so far", ks, best_so_far)],
              x_label="evaluation", y_label="F1")
    outputs = ["selection.json", "selection_trace.csv", "selection_trace.svg"]
    write_manifest(out, "select", resolved, resolved["seed"], inputs, outputs)
    print(
        f"select: gamma={result.gamma} theta={result.theta} "
        f"F1={result.best_f1:.4f} features={','.join(result.features)} -> {out}"
    )
    return 0


def _strategy_list(resolved, args):
    names = [s.strip() for s in str(resolved["strategies"]).split(",") if s.strip()]
    builtins = builtin_strategies()
    configs = []
    for name in names:
        if name not in builtins:
            raise ValueError(
                f"unknown strategy {name!r}; built-ins: "
                f"{', '.join(sorted(builtins))}"
            )
        configs.append(builtins[name])
    if args.selection:
        sel = read_selection(args.selection)
        specs = tuple(parse_spec(n) for n in sel.features)
        configs.append(StrategyConfig(
            name="selected", specs=specs,
            window=int(resolved["selection_window"]),
        ))
    if resolved["windows"]:
        raw = str(resolved["windows"])
        sweep = [int(w.strip()) for w in raw.split(",") if w.strip()]
        configs = [
            StrategyConfig(name=f"{c.name}@w{w}", specs=c.specs, window=w,
                           pipeline=c.pipeline)
            for c in configs for w in sweep
        ]
    if not configs:
        raise ValueError("no strategies requested")
    return configs


def cmd_backtest(args) -> int:
    defaults = {
        "seed": 0, "threads": 1, "strategies": "literature,borfe2,borfe5",
        "train_fraction": 0.84, "test_days": 0, "notional": 10000.0,
        "batch_size": 10, "selection_window": 40, "windows": "",
    }
    resolved = _resolve(args, defaults)
    out = _out_dir(args)
    bars, returns, counts, inputs = _load_dataset(args.data)
    if args.selection:
        inputs["selection"] = args.selection
    configs = _strategy_list(resolved, args)
    matrices = {
        cfg.name: build_matrix(returns, bars, counts, cfg.specs)
        for cfg in configs
    }
    start = max(m.dates[0] for m in matrices.values())
    end = min(m.dates[-1] for m in matrices.values())
    common = [d for d in next(iter(matrices.values())).dates
              if start <= d <= end]
    n_common = len(common)
    test_days = int(resolved["test_days"])
    if test_days > 0:
        cut = n_common - test_days
    else:
        cut = int(n_common * float(resolved["train_fraction"]))
    if cut <= 0 or cut >= n_common:
        raise SpanTooShort(
            f"test split leaves {n_common - cut} of {n_common} rows"
        )
    span = (common[cut], common[-1])
    report = compare_strategies(
        matrices, configs, span, seed=int(resolved["seed"]),
        notional=float(resolved["notional"]),
        batch_size=int(resolved["batch_size"]),
        threads=int(resolved["threads"]),
    )
    outputs = []
    summary_rows = []
    for cfg, result in zip(configs, report.results):
        daily_name = f"{cfg.name}_daily.csv"
        batches_name = f"{cfg.name}_batches.csv"
        write_daily_report(result, out / daily_name)
        write_batches(result, out / batches_name)
        outputs.extend([daily_name, batches_name])
        m = result.metrics
        summary_rows.append([
            cfg.name, cfg.window, len(cfg.specs),
            sentiment_kind_count(cfg.specs), len(result.dates),
            m.tp, m.fp, m.tn, m.fn,
            repr(m.accuracy), repr(m.precision), repr(m.recall), repr(m.f1),
            repr(result.trades.final_pnl),
        ])
    with (out / "comparison.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "strategy", "window", "n_features", "n_sentiment_features",
            "trading_days", "tp", "fp", "tn", "fn", "accuracy", "precision",
            "recall", "f1", "final_pnl",
        ])
        writer.writerows(summary_rows)
    outputs.append("comparison.csv")
    first = report.results[0]
    tick_labels = [d.isoformat() for d in first.dates]
    line_plot(
        out / "cum_pnl.svg", "Cumulative P&L",
        [(r.strategy, list(range(len(r.dates))), r.trades.cumulative)
         for r in report.results],
        x_label="trading day", y_label="P&L",
        x_tick_labels=tick_labels,
    )
    outputs.append("cum_pnl.svg")
    box_plot(
        out / "batch_f1.svg", "Batch F1 by strategy",
        [(r.strategy, [b.f1 for b in r.batches]) for r in report.results],
        y_label="F1",
    )
    outputs.append("batch_f1.svg")
    write_manifest(out, "backtest", resolved, resolved["seed"], inputs, outputs)
    lines = ", ".join(
        f"{r.strategy}: F1={r.metrics.f1:.4f} pnl={r.trades.final_pnl:.2f}"
        for r in report.results
    )
    print(f"backtest over {span[0]}..{span[1]}: {lines} -> {out}")
    return 0


def cmd_synth(args) -> int:
    defaults = {
        "seed": 0, "n_days": 730, "neutral_fraction": 0.8, "noise": 0.8,
        "seasonality": 0.6, "volume_min": 120, "volume_max": 260,
        "r_scale": 0.012, "start": "2024-01-01", "weights": "",
    }
    resolved = _resolve(args, defaults)
    out = _out_dir(args)
    raw_weights = resolved["weights"]
    if isinstance(raw_weights, dict):
        weights = raw_weights
    elif raw_weights:
        raw = str(raw_weights)
        if raw.lstrip().startswith("{"):
            weights = json.loads(raw)
        else:
            weights = json.loads(Path(raw).read_text())
    else:
        weights = None
    kwargs = {} if weights is None else {"weights": weights}
    config = SynthConfig(
        n_days=int(resolved["n_days"]),
        seed=int(resolved["seed"]),
        noise_level=float(resolved["noise"]),
        seasonality_amplitude=float(resolved["seasonality"]),
        neutral_fraction=float(resolved["neutral_fraction"]),
        tweet_volume=(int(resolved["volume_min"]), int(resolved["volume_max"])),
        r_scale=float(resolved["r_scale"]),
        start=date.fromisoformat(str(resolved["start"])),
        **kwargs,
    )
    result = generate(config)
    write_bars(result.bars, out / "bars.csv")
    write_tweets(result.tweets, out / "tweets.csv")
    write_ground_truth(result.truth, out / "ground_truth.json")
    manifest_cfg = dict(resolved)
    manifest_cfg["weights"] = dict(config.weights)
    write_manifest(out, "synth", manifest_cfg, resolved["seed"], {},
                   ["bars.csv", "tweets.csv", "ground_truth.json"])
    print(
        f"synth: {len(result.bars)} bars, {len(result.tweets)} tweets, "
        f"bayes accuracy {result.truth.bayes_accuracy:.3f} -> {out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentalpha",
        description="Sentiment-augmented return-sign prediction pipeline",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="run seed (default 0)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default 1)")
        p.add_argument("--config", default=None,
                       help="JSON file with parameter defaults")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("ingest", help="align bars and bucket tweets")
    common(p)
    p.add_argument("--bars", required=True, help="daily bar CSV")
    p.add_argument("--tweets", required=True, help="tweet CSV")
    p.add_argument("--lexicon", default=None,
                   help="JSON word lists for labeling unlabeled tweets")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="correlation and autocorrelation report")
    common(p)
    p.add_argument("--data", required=True, help="ingest output directory")
    p.add_argument("--max-lag", dest="max_lag", type=int, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("select", help="search feature count and forest size")
    common(p)
    p.add_argument("--data", required=True, help="ingest output directory")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--train-days", dest="train_days", type=int, default=None)
    p.add_argument("--test-days", dest="test_days", type=int, default=None)
    p.add_argument("--train-fraction", dest="train_fraction", type=float,
                   default=None)
    p.add_argument("--theta-min", dest="theta_min", type=int, default=None)
    p.add_argument("--theta-max", dest="theta_max", type=int, default=None)
    p.add_argument("--base-set", dest="base_set", default=None,
                   choices=sorted(BASE_SETS))
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("backtest", help="walk-forward strategy comparison")
    common(p)
    p.add_argument("--data", required=True, help="ingest output directory")
    p.add_argument("--strategies", default=None,
                   help="comma-separated built-in strategy names")
    p.add_argument("--selection", default=None,
                   help="selection.json to run as an extra strategy")
    p.add_argument("--selection-window", dest="selection_window", type=int,
                   default=None)
    p.add_argument("--train-fraction", dest="train_fraction", type=float,
                   default=None)
    p.add_argument("--test-days", dest="test_days", type=int, default=None,
                   help="use the last N grid rows as the test span")
    p.add_argument("--notional", type=float, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--windows", default=None,
                   help="comma-separated window sweep applied to every strategy")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p)
    p.add_argument("--n-days", dest="n_days", type=int, default=None)
    p.add_argument("--neutral-fraction", dest="neutral_fraction", type=float,
                   default=None)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--seasonality", type=float, default=None)
    p.add_argument("--volume-min", dest="volume_min", type=int, default=None)
    p.add_argument("--volume-max", dest="volume_max", type=int, default=None)
    p.add_argument("--r-scale", dest="r_scale", type=float, default=None)
    p.add_argument("--start", default=None, help="grid start date (a Monday)")
    p.add_argument("--weights", default=None,
                   help="planted weights: inline JSON or a JSON file path")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SentalphaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


def run() -> None:
    sys.exit(main())
