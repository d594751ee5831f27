"""Release acceptance checks, one test per shipped guarantee.

Every test prints a single ``[criterion NN] ... PASS`` line so a verbose run
reads as a checklist. Wall-clock budgets target a 4-core desktop; the formula
checks in criterion 1 only report their runtime.
"""

import hashlib
import math
import shutil
import time
from datetime import date, timedelta

import numpy as np

from sentalpha.backtest import (
    StrategyConfig,
    builtin_strategies,
    compare_strategies,
    trade_sim,
    walk_forward,
)
from sentalpha.bo_rfe import BoRfeConfig, bo_rfe_run, rfe
from sentalpha.cli import main
from sentalpha.correlation import acf, lagged_correlation, pearson
from sentalpha.features import FeatureMatrix, build_matrix, parse_spec, slice_rows
from sentalpha.market_data import align_calendar, compute_returns
from sentalpha.ml import PipelineConfig, classification_metrics
from sentalpha.ml.smote import smote_balance
from sentalpha.ml.svm import rbf_gram, svm_predict, svm_train
from sentalpha.sentiment import Session, SessionCounts, daily_counts, sentiment_index
from sentalpha.synth import SynthConfig, generate, planted_matrix


def _report(number: int, label: str, detail: str) -> None:
    print(f"[criterion {number:02d}] {label}: PASS ({detail})")


def _rel_err(value: float, expected: float) -> float:
    return abs(value - expected) / abs(expected)


# -- 1. formula exactness ----------------------------------------------------

def test_criterion_01_formula_exactness():
    t0 = time.perf_counter()

    idx = sentiment_index(
        SessionCounts(date(2024, 1, 2), Session.FULL_DAY, 10, 5, 85)
    )
    assert _rel_err(idx.score, 0.05) <= 1e-12

    y_true = np.array([1, 1, 1, -1, 1, 1, -1, -1, -1, -1])
    y_pred = np.array([1, 1, 1, 1, -1, -1, -1, -1, -1, -1])
    m = classification_metrics(y_true, y_pred)
    assert (m.tp, m.fp, m.fn, m.tn) == (3, 1, 2, 4)
    assert _rel_err(m.accuracy, 0.7) <= 1e-12
    assert _rel_err(m.precision, 0.75) <= 1e-12
    assert _rel_err(m.recall, 0.6) <= 1e-12
    assert _rel_err(m.f1, 2.0 / 3.0) <= 1e-12

    up = trade_sim([0.01], [1], notional=10000.0)
    down = trade_sim([0.01], [-1], notional=10000.0)
    assert _rel_err(up.daily_pnl[0], 100.0) <= 1e-12
    assert _rel_err(down.daily_pnl[0], -100.0) <= 1e-12

    a = np.array([[0.0, 0.0]])
    b = np.array([[1.0, 0.0]])
    assert _rel_err(rbf_gram(a, a, 1.0)[0, 0], 1.0) <= 1e-12
    assert _rel_err(rbf_gram(a, b, 1.0)[0, 0], math.exp(-1.0)) <= 1e-12
    far = np.array([[5.0, 0.0]])
    assert _rel_err(rbf_gram(a, far, 0.5)[0, 0], math.exp(-12.5)) <= 1e-12

    elapsed = time.perf_counter() - t0
    _report(1, "formula exactness", f"rel err <= 1e-12, {elapsed * 1e3:.1f} ms")


# -- 2. statistics oracle equivalence ----------------------------------------

def _pearson_loop(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sxx = syy = 0.0
    for i in range(n):
        sxy += (x[i] - mx) * (y[i] - my)
        sxx += (x[i] - mx) ** 2
        syy += (y[i] - my) ** 2
    return sxy / math.sqrt(sxx * syy)


def test_criterion_02_statistics_match_brute_force():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 201))
        x = rng.normal(size=n)
        y = rng.normal(size=n) + 0.4 * x
        max_lag = min(10, n - 2)

        worst = max(worst, abs(pearson(x, y) - _pearson_loop(list(x), list(y))))
        lagged = lagged_correlation(x, y, max_lag)
        auto = acf(x, max_lag)
        for lag in range(max_lag + 1):
            xs, ys = list(x[: n - lag]), list(y[lag:])
            worst = max(worst, abs(lagged[lag] - _pearson_loop(xs, ys)))
            worst = max(worst, abs(auto[lag] - _pearson_loop(xs, list(x[lag:]))))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-10
    assert elapsed < 5.0
    _report(2, "statistics oracle equivalence",
            f"50 series, worst |diff| {worst:.2e}, {elapsed:.2f} s")


# -- 3. SVM correctness ------------------------------------------------------

def test_criterion_03_svm_on_separable_problems():
    t0 = time.perf_counter()
    worst_kkt = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((40, 2))
        y = np.where(X[:, 0] >= 0.0, 1, -1)
        if np.unique(y).size == 1:
            y[0] = -y[0]
        X[:, 0] += 0.6 * y  # pushes the classes a true margin apart
        model = svm_train(X, y, C=10.0, gamma_rbf=1.0, tol=1e-3, max_passes=500)
        assert model.converged
        assert np.array_equal(svm_predict(model, X), y)
        assert model.kkt_residual <= 1e-3
        dual = np.asarray(model.dual_objective)
        assert np.all(np.diff(dual) >= -1e-9)
        worst_kkt = max(worst_kkt, model.kkt_residual)

    xor_X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    xor_y = np.array([1, 1, -1, -1])
    xor_model = svm_train(xor_X, xor_y, C=10.0, gamma_rbf=1.0)
    assert np.array_equal(svm_predict(xor_model, xor_X), xor_y)

    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    _report(3, "SVM correctness",
            f"100/100 exact, worst KKT {worst_kkt:.2e}, XOR ok, {elapsed:.2f} s")


# -- 4. SMOTE geometry -------------------------------------------------------

def _on_some_segment(row, originals, atol=1e-9):
    n = len(originals)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = originals[j] - originals[i]
            denom = float(d @ d)
            if denom == 0.0:
                if np.allclose(row, originals[i], atol=atol):
                    return True
                continue
            t = float((row - originals[i]) @ d) / denom
            if -1e-12 <= t <= 1.0 + 1e-12:
                if np.allclose(originals[i] + t * d, row, atol=atol):
                    return True
    return False


def test_criterion_04_smote_geometry():
    t0 = time.perf_counter()
    rng = np.random.default_rng(42)
    X = np.vstack([rng.normal(0.0, 1.0, (40, 3)), rng.normal(2.5, 1.0, (9, 3))])
    y = np.array([-1] * 40 + [1] * 9)

    Xb, yb = smote_balance(X, y, k=5, seed=7)
    assert int((yb == 1).sum()) == int((yb == -1).sum()) == 40
    assert np.array_equal(Xb[: len(X)], X)
    synthetic = Xb[len(X):]
    assert np.all(yb[len(X):] == 1)
    minority = X[40:]
    for row in synthetic:
        assert _on_some_segment(row, minority)

    Xb2, yb2 = smote_balance(X, y, k=5, seed=7)
    assert np.array_equal(Xb, Xb2) and np.array_equal(yb, yb2)

    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(4, "SMOTE geometry",
            f"{len(synthetic)} synthetic rows on segments, balanced, "
            f"deterministic, {elapsed:.2f} s")


# -- 5. planted-feature recovery, plain RFE ----------------------------------

def test_criterion_05_rfe_recovers_planted_pair():
    t0 = time.perf_counter()
    hits = 0
    for seed in range(20):
        X, y = planted_matrix(500, 10, {2: 1.0, 7: 1.0}, 0.4, seed=seed)
        if sorted(rfe(X, y, n_keep=2, n_trees=20, seed=seed)) == [2, 7]:
            hits += 1
    elapsed = time.perf_counter() - t0
    assert hits >= 18  # >= 90% of 20 seeds
    assert elapsed < 60.0
    _report(5, "planted-feature recovery (RFE)",
            f"{hits}/20 exact pairs, {elapsed:.1f} s")


# -- 6. planted-feature recovery, BO over RFE --------------------------------

def _ring_data(seed: int, n: int = 260, p: int = 10):
    # radial signal on two columns; extra kept features dilute it sharply
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    margin = X[:, 1] ** 2 + X[:, 6] ** 2 - 2.0 * math.log(2.0)
    y = np.where(margin + 0.15 * rng.standard_normal(n) >= 0.0, 1, -1)
    if np.unique(y).size == 1:
        y[0] = -y[0]
    return X, y.astype(np.int64)


def test_criterion_06_bo_rfe_recovers_planted_pair():
    t0 = time.perf_counter()
    names = [f"f{i}" for i in range(10)]
    hits = 0
    gammas = []
    for seed in range(10):
        X, y = _ring_data(seed)
        result = bo_rfe_run(X, y, names, BoRfeConfig(iterations=50, seed=seed))
        history = [e.f1 for e in result.evaluations]
        running = np.maximum.accumulate(history)
        assert np.all(np.diff(running) >= 0.0)
        assert result.best_f1 == max(history)
        gammas.append(result.gamma)
        if {"f1", "f6"} <= set(result.features) and result.gamma in (2, 3):
            hits += 1
    elapsed = time.perf_counter() - t0
    assert hits >= 8  # >= 80% of 10 runs
    assert elapsed < 600.0
    _report(6, "planted-feature recovery (BO-RFE)",
            f"{hits}/10 runs, gammas {gammas}, {elapsed:.0f} s")


# -- 7. backtest causality ---------------------------------------------------

def test_criterion_07_truncation_leaves_predictions_unchanged():
    t0 = time.perf_counter()
    start = date(2024, 1, 1)
    n = 130
    X, y = planted_matrix(n, 4, {0: 1.5}, 0.4, seed=5)
    trading = np.ones(n, dtype=bool)
    trading[::7] = False
    matrix = FeatureMatrix(
        dates=tuple(start + timedelta(days=i) for i in range(n)),
        names=tuple(f"f{i}" for i in range(4)),
        X=X, y=y, returns=y * 0.01, trading=trading,
    )
    strategy = StrategyConfig(name="probe", specs=(), window=40)
    span = (matrix.dates[60], matrix.dates[-1])
    full = walk_forward(matrix, strategy, span, seed=17)

    sampled = np.linspace(0, len(full.dates) - 1, 20).astype(int)
    for k in sampled:
        day = full.dates[k]
        i = matrix.index_of(day)
        truncated = slice_rows(matrix, 0, i + 1)  # nothing after the day
        redo = walk_forward(truncated, strategy, (day, day), seed=17)
        assert redo.y_pred.tolist() == [int(full.y_pred[k])]

    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    _report(7, "backtest causality",
            f"20 sampled days identical after truncation, {elapsed:.1f} s")


# -- 8. strategy-ranking sanity ----------------------------------------------

# none of these appear, at any feedback depth, in the generator's margin
_NOISE_SPECS = tuple(
    parse_spec(name)
    for name in ("S_intra[t-2]", "S_post[t-3]", "N[t-2]", "Volume[t-1]")
)


def test_criterion_08_signal_strategy_beats_noise_strategy():
    t0 = time.perf_counter()
    f1s = {"borfe5": [], "noise": []}
    pnls = {"borfe5": [], "noise": []}
    for seed in range(5):
        cfg = SynthConfig(n_days=430, seed=seed, seasonality_amplitude=0.0,
                          noise_level=0.5)
        result = generate(cfg)
        aligned = align_calendar(result.bars)
        returns = compute_returns(aligned)
        counts = daily_counts(result.tweets,
                              (aligned[0].date, aligned[-1].date))
        borfe5 = builtin_strategies()["borfe5"]
        noise = StrategyConfig("noise", _NOISE_SPECS, borfe5.window)
        matrices = {
            "borfe5": build_matrix(returns, aligned, counts, borfe5.specs),
            "noise": build_matrix(returns, aligned, counts, _NOISE_SPECS),
        }
        dates = matrices["borfe5"].dates
        report = compare_strategies(matrices, [borfe5, noise],
                                    (dates[-60], dates[-1]),
                                    seed=seed, threads=4)
        for r in report.results:
            f1s[r.strategy].append(r.metrics.f1)
            pnls[r.strategy].append(r.trades.final_pnl)

    mean_f1 = {k: float(np.mean(v)) for k, v in f1s.items()}
    mean_pnl = {k: float(np.mean(v)) for k, v in pnls.items()}
    elapsed = time.perf_counter() - t0
    assert mean_f1["borfe5"] > mean_f1["noise"]
    assert mean_pnl["borfe5"] > mean_pnl["noise"]
    assert elapsed < 300.0
    _report(8, "strategy-ranking sanity",
            f"mean F1 {mean_f1['borfe5']:.3f} > {mean_f1['noise']:.3f}, "
            f"mean P&L {mean_pnl['borfe5']:+.0f} > {mean_pnl['noise']:+.0f}, "
            f"{elapsed:.0f} s")


# -- 9. trading-rule identities ----------------------------------------------

def test_criterion_09_trading_rule_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    returns = rng.normal(0.0, 0.02, size=60)
    positions = np.where(returns >= 0.0, 1, -1)

    foresight = trade_sim(returns, positions, notional=10000.0)
    bound = np.cumsum(10000.0 * np.abs(returns))
    assert np.array_equal(foresight.cumulative, bound)

    flipped = trade_sim(returns, -positions, notional=10000.0)
    assert np.array_equal(flipped.daily_pnl, -foresight.daily_pnl)
    assert np.array_equal(flipped.cumulative, -foresight.cumulative)

    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    _report(9, "trading-rule identities",
            f"foresight bound and flip negation exact, {elapsed * 1e3:.0f} ms")


# -- 10. end-to-end determinism ----------------------------------------------

def _run_chain(base) -> None:
    synth = base / "synth"
    ingest = base / "ingest"
    select = base / "select"
    backtest = base / "backtest"
    assert main(["synth", "--n-days", "730", "--seed", "11",
                 "--out", str(synth)]) == 0
    assert main(["ingest", "--bars", str(synth / "bars.csv"),
                 "--tweets", str(synth / "tweets.csv"),
                 "--seed", "11", "--out", str(ingest)]) == 0
    assert main(["select", "--data", str(ingest), "--seed", "11",
                 "--threads", "4", "--out", str(select)]) == 0
    assert main(["backtest", "--data", str(ingest),
                 "--selection", str(select / "selection.json"),
                 "--seed", "11", "--threads", "4",
                 "--out", str(backtest)]) == 0


def _tree_hashes(base) -> dict:
    out = {}
    for path in sorted(base.rglob("*")):
        if path.is_file():
            out[str(path.relative_to(base))] = hashlib.sha256(
                path.read_bytes()
            ).hexdigest()
    return out


def test_criterion_10_end_to_end_determinism(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    base = tmp_path / "chain"

    t0 = time.perf_counter()
    _run_chain(base)
    first_elapsed = time.perf_counter() - t0
    first = _tree_hashes(base)

    shutil.rmtree(base)
    t1 = time.perf_counter()
    _run_chain(base)
    second_elapsed = time.perf_counter() - t1
    second = _tree_hashes(base)

    assert first == second
    assert len(first) >= 20
    assert first_elapsed <= 600.0 and second_elapsed <= 600.0
    _report(10, "end-to-end determinism",
            f"{len(first)} files byte-identical twice, runs "
            f"{first_elapsed:.0f} s and {second_elapsed:.0f} s")


# -- 11. seasonal shape and batch counts on generated data --------------------

def test_criterion_11_weekly_acf_peak_and_batch_count(tmp_path):
    synth = tmp_path / "synth"
    ingest = tmp_path / "ingest"
    analyze = tmp_path / "analyze"
    backtest = tmp_path / "backtest"
    assert main(["synth", "--n-days", "730", "--seed", "5",
                 "--seasonality", "3.0", "--neutral-fraction", "0.4",
                 "--volume-min", "600", "--volume-max", "600",
                 "--out", str(synth)]) == 0
    assert main(["ingest", "--bars", str(synth / "bars.csv"),
                 "--tweets", str(synth / "tweets.csv"),
                 "--out", str(ingest)]) == 0
    assert main(["analyze", "--data", str(ingest), "--max-lag", "10",
                 "--out", str(analyze)]) == 0

    import csv

    with (analyze / "correlations.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    auto = {int(r["lag"]): float(r["value"])
            for r in rows if r["kind"] == "acf"}
    peak = max(range(1, 11), key=lambda lag: auto[lag])
    assert peak == 7

    # trailing row count whose trading days number exactly 80
    with (ingest / "aligned.csv").open() as fh:
        flags = [int(r["interpolated"]) == 0 for r in csv.DictReader(fh)]
    trading_seen = 0
    test_days = 0
    for flag in reversed(flags):
        test_days += 1
        trading_seen += flag
        if trading_seen == 80:
            break
    assert trading_seen == 80

    assert main(["backtest", "--data", str(ingest), "--strategies", "borfe2",
                 "--test-days", str(test_days), "--threads", "4",
                 "--out", str(backtest)]) == 0
    with (backtest / "borfe2_batches.csv").open() as fh:
        batches = list(csv.DictReader(fh))
    assert len(batches) == 8
    assert all(int(b["n_days"]) == 10 for b in batches)
    assert all(int(b["partial"]) == 0 for b in batches)

    _report(11, "seasonal shape and batch counts",
            f"acf peak at lag {peak}, 8 full batches over 80 trading days")
