import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from hcpd.detectors import ScoreSeries
from hcpd.thresholding import bootstrap_threshold, extract_changes

scores_strategy = st.lists(st.floats(0, 100, allow_nan=False), min_size=2, max_size=40)


@pytest.mark.parametrize("c", [0.0, 0.37, 12.5])
@pytest.mark.parametrize("level", [0.5, 0.95])
def test_constant_series(c, level):
    assert bootstrap_threshold([c] * 17, level, 50, 3) == c


def test_single_spike_matches_binomial_enumeration():
    # 100 zeros and one 10.  A resample's 95th percentile sits exactly on order
    # statistic 95 of 101, so it is 10 iff the spike was drawn at least 6 times.
    scores = [0.0] * 100 + [10.0]
    p = stats.binom.sf(5, 101, 1 / 101)
    B = 1000
    thr = bootstrap_threshold(scores, 0.95, B, 0)
    assert thr < 10
    assert abs(thr - 10 * p) < 4 * 10 * np.sqrt(p * (1 - p) / B) + 1e-12


def test_mean_percentile_matches_full_enumeration():
    scores = np.array([0.0, 1.0, 5.0])
    exact = np.mean([np.percentile(scores[list(ix)], 80, method="linear")
                     for ix in itertools.product(range(3), repeat=3)])
    est = bootstrap_threshold(scores, 0.8, 200_000, 1)
    assert est == pytest.approx(exact, abs=0.02)


def test_two_point_series_bounds():
    assert 0 <= bootstrap_threshold([0, 1], 0.5, 100, 0) <= 1


def test_bit_stable_for_fixed_seed():
    x = np.random.default_rng(0).random(50)
    assert bootstrap_threshold(x, seed=7) == bootstrap_threshold(x, seed=7)


@pytest.mark.parametrize("bad", [[], [1.0], [1.0, float("nan")]])
def test_degenerate_input(bad):
    with pytest.raises(ValueError):
        bootstrap_threshold(bad)


@settings(max_examples=100)
@given(scores_strategy, st.integers(0, 1000))
def test_within_range_and_monotone_in_level(scores, seed):
    lo = bootstrap_threshold(scores, 0.5, 100, seed)
    hi = bootstrap_threshold(scores, 0.95, 100, seed)
    assert min(scores) <= lo <= hi <= max(scores)


def series(scores, thr):
    return ScoreSeries("global", range(1, len(scores) + 1), scores, thr)


@pytest.mark.parametrize("scores, thr, want", [
    ([1, 2, 9, 1], 5, (3,)),
    ([3, 3, 3], 2.9, (1, 2, 3)),
    ([3, 3, 3], 3, ()),
])
def test_extract_changes(scores, thr, want):
    assert extract_changes(series(scores, thr)) == want


def test_extract_needs_a_threshold():
    with pytest.raises(ValueError):
        extract_changes(ScoreSeries("global", [1, 2], [0.1, 0.2]))


@given(scores_strategy, st.floats(0, 100), st.floats(0, 100))
def test_raising_threshold_never_adds_changes(scores, a, b):
    lo, hi = sorted((a, b))
    assert set(extract_changes(series(scores, hi))) <= set(extract_changes(series(scores, lo)))
