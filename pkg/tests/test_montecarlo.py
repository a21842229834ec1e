import math
import warnings

import numpy as np
import pytest

from ringqfc import pairsource as ps
from ringqfc.errors import StatisticsWarning
from ringqfc.montecarlo import McResult, monte_carlo_coincidences, monte_carlo_self_correlation


def test_same_seed_same_histogram():
    m = ps.PairSourceModel(1, 0, 0.05, 0.05, 1e3, 1e3, 4e-9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StatisticsWarning)
        a = monte_carlo_coincidences(m, 1e5, 0.2, 11, shards=3)
        b = monte_carlo_coincidences(m, 1e5, 0.2, 11, shards=3)
        c = monte_carlo_coincidences(m, 1e5, 0.2, 12, shards=3)
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


def test_short_run_warns():
    m = ps.PairSourceModel(1, 0, 0.05, 0.05, 10, 10, 4e-9)
    with pytest.warns(StatisticsWarning):
        monte_carlo_coincidences(m, 1e3, 0.1, 0)


def test_estimators():
    r = McResult(np.arange(-2, 3) * 1e-9, np.array([10, 10, 110, 10, 10]), 2.0, 1e-9, 110, 10.0, 4)
    assert r.car_hat == pytest.approx(10.0)
    assert r.peak_ratio == pytest.approx(11.0)
    assert r.cp_hat == pytest.approx(100 / 2.0 * 1e-9)
    assert r.ca_hat == pytest.approx(10 / 2.0 * 1e-9)
    assert r.car_sigma > 0


def test_rates_match_closed_form():
    m = ps.PairSourceModel(1, 0, 0.05, 0.05, 5e4, 5e4, 4e-9)
    g = 1e6
    r = monte_carlo_coincidences(m, g, 5.0, 3, accidental_bins=2000)
    cp, ca = ps.coincidence_rates(m, g)
    assert abs(r.cp_hat - cp) < 3 * r.cp_sigma
    assert abs(r.ca_hat - ca) < 3 * r.ca_sigma


def test_self_correlation_is_bunched():
    with pytest.warns(StatisticsWarning):
        r = monte_carlo_self_correlation(2e9, 2e-5, 5, 16e-12)
    # bin-averaged 1 + exp(-gamma|t|) over a 16 ps bin
    g = 2 * math.pi * 640e6 * 16e-12
    expected = 1 + 2 / g * (1 - math.exp(-g / 2))
    assert abs(r.peak_ratio - expected) < 4 * r.car_sigma
    with pytest.raises(ValueError):
        monte_carlo_self_correlation(1e9, 1e-6, 0, 64e-12, dt=1e-10)
