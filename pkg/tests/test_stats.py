import math

import numpy as np
import pytest
from scipy.stats import beta

from zdecode import stats


def test_constant_samples():
    ci = stats.bootstrap_ci(np.full(50, 0.3), rng=0)
    assert ci.lower == ci.upper == ci.mean == pytest.approx(0.3)


def test_balanced_binary_normal_approximation():
    n = 4000
    x = np.tile([0.0, 1.0], n // 2)
    ci = stats.bootstrap_ci(x, rng=1)
    half = 1.96 * math.sqrt(0.25 / n)
    assert ci.lower == pytest.approx(0.5 - half, abs=0.3 * half)
    assert ci.upper == pytest.approx(0.5 + half, abs=0.3 * half)


def test_bootstrap_deterministic():
    x = np.random.default_rng(0).random(100)
    assert stats.bootstrap_ci(x, rng=5) == stats.bootstrap_ci(x, rng=5)


def test_bootstrap_validation():
    with pytest.raises(ValueError):
        stats.bootstrap_ci([])
    with pytest.raises(ValueError):
        stats.bootstrap_ci([1.0], level=1.0)


def test_jeffreys_quantiles():
    ci = stats.jeffreys_ci(0, 10)
    assert ci.lower == pytest.approx(beta.ppf(0.025, 0.5, 10.5))
    assert ci.upper == pytest.approx(beta.ppf(0.975, 0.5, 10.5))
    assert ci.lower <= ci.mean <= ci.upper
    hi = stats.jeffreys_ci(10, 10)
    assert 1 - hi.upper == pytest.approx(ci.lower, abs=1e-15)
    assert hi.lower == pytest.approx(1 - ci.upper)
    with pytest.raises(ValueError):
        stats.jeffreys_ci(11, 10)
    with pytest.raises(ValueError):
        stats.jeffreys_ci(0, 0)


def test_overlap():
    a = stats.CiResult(0.5, 0.4, 0.6, 0.95, "x")
    assert a.overlaps(stats.CiResult(0.7, 0.6, 0.8, 0.95, "x"))
    assert not a.overlaps(stats.CiResult(0.7, 0.61, 0.8, 0.95, "x"))


def test_width_curve():
    x = np.random.default_rng(2).random(2000)
    fr = [0.05, 0.1, 0.2, 0.4, 0.8, 1.0]
    c = stats.ci_width_vs_fraction(x, fr, rng=3)
    assert c.widths[-1] == pytest.approx(stats.bootstrap_ci(x, rng=9).width, rel=0.15)
    # widths shrink like 1/sqrt(n)
    scaled = c.widths * np.sqrt(fr)
    assert np.all(np.abs(scaled / scaled.mean() - 1) < 0.25)
    again = stats.ci_width_vs_fraction(x, fr, rng=3)
    assert np.array_equal(c.widths, again.widths)
    with pytest.raises(ValueError):
        stats.ci_width_vs_fraction(x, [0.0, 1.0])


def test_crossing_against_counting_reference():
    rng = np.random.default_rng(4)
    ind = (rng.random(5000) < 0.8).astype(float)
    smooth = np.clip(0.8 + 0.1 * rng.standard_normal(5000), 0, 1)
    c = stats.ci_width_vs_fraction(smooth, np.linspace(0.05, 1, 20), rng=5, reference_samples=ind,
                                   reference_method="jeffreys")
    # variance ratio 0.01 / 0.16 puts the crossing near 1/16
    assert c.crossing == pytest.approx(1 / 16, abs=0.04)


def test_crossing_fraction_interpolates():
    assert stats.crossing_fraction([0.1, 0.2, 0.3], [3.0, 2.0, 1.0], 1.5) == pytest.approx(0.25)
    assert stats.crossing_fraction([0.1, 0.2], [3.0, 2.0], 1.0) is None
    assert stats.crossing_fraction([0.1, 0.2], [0.5, 0.4], 1.0) == 0.1
