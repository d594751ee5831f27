"""Correlation statistics against brute-force oracles."""

import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sentalpha.correlation import acf, lagged_correlation, pearson, write_long_format
from sentalpha.errors import ConstantSeries, LengthMismatch


def pearson_oracle(x, y):
    """Textbook double loop, no vectorization."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sxx = syy = 0.0
    for i in range(n):
        sxy += (x[i] - mx) * (y[i] - my)
        sxx += (x[i] - mx) ** 2
        syy += (y[i] - my) ** 2
    return sxy / math.sqrt(sxx * syy)


def test_pearson_frozen_oracle():
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)


def test_pearson_perfect_and_inverse():
    assert pearson([1, 2, 3], [2, 4, 6]) == 1.0
    assert pearson([1, 2, 3], [-2, -4, -6]) == -1.0


def test_pearson_matches_brute_force_on_seeded_series():
    rng = np.random.default_rng(314)
    for trial in range(50):
        n = int(rng.integers(3, 201))
        x = rng.normal(size=n)
        y = rng.normal(size=n) + 0.3 * x
        assert pearson(x, y) == pytest.approx(pearson_oracle(list(x), list(y)),
                                              abs=1e-10)


def test_pearson_errors():
    with pytest.raises(LengthMismatch):
        pearson([1, 2], [1, 2, 3])
    with pytest.raises(ConstantSeries):
        pearson([5, 5, 5], [1, 2, 3])
    with pytest.raises(ConstantSeries):
        pearson([1.0], [2.0])


def test_pearson_never_leaves_unit_interval():
    # tiny float drift must not push |r| above 1
    x = np.array([1e-9, 2e-9, 3e-9] * 30)
    assert abs(pearson(x, x * 7.0)) <= 1.0


def test_lagged_correlation_matches_shifted_pearson():
    rng = np.random.default_rng(9)
    x = rng.normal(size=120)
    y = np.empty(120)
    y[3:] = x[:-3]
    y[:3] = rng.normal(size=3)
    prof = lagged_correlation(x, y, 8)
    assert prof.shape == (9,)
    n = 120
    for lag in range(9):
        manual = pearson_oracle(list(x[: n - lag]), list(y[lag:]))
        assert prof[lag] == pytest.approx(manual, abs=1e-10)
    # x was planted to lead y by three steps
    assert int(np.argmax(prof)) == 3
    assert prof[3] > 0.95


def test_lagged_correlation_rejects_excess_lag():
    with pytest.raises(LengthMismatch):
        lagged_correlation(np.arange(5.0), np.arange(5.0) ** 2, 4)
    lagged_correlation(np.arange(5.0), np.arange(5.0) ** 2, 3)


def test_acf_lag_zero_is_one():
    rng = np.random.default_rng(4)
    x = rng.normal(size=60)
    a = acf(x, 10)
    assert a[0] == 1.0
    assert a.shape == (11,)


def test_acf_detects_planted_period():
    i = np.arange(140)
    rng = np.random.default_rng(11)
    x = np.cos(2 * np.pi * i / 7) + 0.2 * rng.normal(size=140)
    a = acf(x, 10)
    assert int(np.argmax(a[1:])) + 1 == 7


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=60).filter(
    lambda v: len({3.0 * t + 1.0 for t in v}) > 1))
def test_pearson_symmetry_and_scale_invariance(vals):
    x = np.asarray(vals)
    rng = np.random.default_rng(len(vals))
    y = rng.normal(size=len(vals))
    r1 = pearson(x, y)
    assert pearson(y, x) == pytest.approx(r1, abs=1e-12)
    assert pearson(3.0 * x + 1.0, y) == pytest.approx(r1, abs=1e-9)


def test_write_long_format_none_becomes_empty_cell(tmp_path):
    path = tmp_path / "corr.csv"
    write_long_format(
        [("lagged", "S_pre", "R", 1, 0.25), ("lagged", "S_pre", "R", 2, None)],
        path,
    )
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["kind", "series_x", "series_y", "lag", "value"]
    assert rows[1][4] == "0.25"
    assert rows[2][4] == ""
