import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special
from scipy import stats as sps

from trapga._validation import DimensionError
from trapga.stats import (
    ComparisonVerdict,
    betainc,
    t_critical,
    t_sf_two_sided,
    t_test_paired,
    t_test_two_sample,
)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("df", [29, 58])
def test_p_values_match_scipy(t, df):
    assert t_sf_two_sided(t, df) == pytest.approx(2 * sps.t.sf(t, df), abs=1e-6)
    assert t_sf_two_sided(-t, df) == t_sf_two_sided(t, df)


@given(st.floats(0.1, 50), st.floats(0.1, 50), st.floats(0, 1))
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-10)


def test_betainc_domain():
    with pytest.raises(ValueError):
        betainc(1, 1, 1.5)
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0


def test_critical_values():
    assert t_critical(58) == pytest.approx(2.0017, abs=1e-3)
    assert t_critical(29) == pytest.approx(2.0452, abs=1e-3)
    assert t_critical(58) == pytest.approx(sps.t.ppf(0.975, 58), abs=1e-9)
    assert t_critical(1) == pytest.approx(sps.t.ppf(0.975, 1), rel=1e-8)
    with pytest.raises(ValueError):
        t_sf_two_sided(1.0, 0)


def test_two_sample_against_scipy():
    rng = np.random.default_rng(0)
    a = rng.normal(10, 1, 30)
    b = rng.normal(10.5, 1, 30)
    v = t_test_two_sample(a, b)
    ref = sps.ttest_ind(a, b)
    assert v.degrees_of_freedom == 58
    assert v.t_statistic == pytest.approx(ref.statistic, rel=1e-10)
    assert v.p_value == pytest.approx(ref.pvalue, abs=1e-9)


def test_paired_against_scipy():
    rng = np.random.default_rng(1)
    a = rng.normal(10, 1, 30)
    b = a - rng.normal(0.3, 0.5, 30)
    v = t_test_paired(a, b)
    ref = sps.ttest_rel(a, b)
    assert v.degrees_of_freedom == 29
    assert v.t_statistic == pytest.approx(ref.statistic, rel=1e-10)
    assert v.p_value == pytest.approx(ref.pvalue, abs=1e-9)
    assert v.verdict == "+"


def test_identity_and_separation():
    a = np.linspace(1, 2, 30)
    for test in (t_test_two_sample, t_test_paired):
        v = test(a, a.copy())
        assert v.t_statistic == 0 and v.verdict == "~"
    rng = np.random.default_rng(2)
    b = rng.normal(0, 0.1, 30)
    assert t_test_two_sample(b + 10, b).verdict == "+"
    assert t_test_two_sample(b, b + 10).verdict == "-"


def test_zero_variance_cases():
    v = t_test_two_sample(np.full(5, 3.0), np.full(5, 3.0))
    assert (v.t_statistic, v.p_value, v.verdict) == (0.0, 1.0, "~")
    v = t_test_two_sample(np.full(5, 4.0), np.full(5, 3.0))
    assert v.p_value == 0.0 and v.verdict == "+" and math.isinf(v.t_statistic)
    v = t_test_paired(np.arange(5.0) + 1, np.arange(5.0))
    assert v.p_value == 0.0 and v.verdict == "+"


def test_input_validation():
    with pytest.raises(DimensionError):
        t_test_two_sample([1.0], [1.0, 2.0])
    with pytest.raises(DimensionError):
        t_test_paired([1.0, 2.0], [1.0, 2.0, 3.0])


def test_verdict_requires_significance():
    assert ComparisonVerdict(1.0, 58, 0.2, 0.5).verdict == "~"
    assert ComparisonVerdict(-3.0, 58, 0.004, -0.5).verdict == "-"
    assert ComparisonVerdict(3.0, 58, 0.004, 0.5).significant


samples = st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=30)
FLIP = {"+": "-", "-": "+", "~": "~"}


@given(samples, samples)
def test_antisymmetry(a, b):
    fwd = t_test_two_sample(a, b)
    back = t_test_two_sample(b, a)
    assert back.verdict == FLIP[fwd.verdict]
    assert back.p_value == pytest.approx(fwd.p_value, abs=1e-12)


@given(st.lists(st.integers(-50, 50), min_size=3, max_size=30),
       st.lists(st.integers(-50, 50), min_size=3, max_size=30),
       st.integers(-1000, 1000))
def test_shift_invariance(a, b, c):
    # integer samples keep the shifted arithmetic exact
    a = np.array(a, float)
    b = np.array(b, float)
    assert t_test_two_sample(a + c, b + c).verdict == t_test_two_sample(a, b).verdict
