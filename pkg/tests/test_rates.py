import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timebin_sim.errors import NoSolutionError, UndefinedVisibilityError
from timebin_sim.rates import (
    SourceBrightness,
    accidental_rate,
    bell_violation_margin,
    correlated_rate,
    estimate_mu_c,
    fringe_rate,
    singles_rate,
    visibility,
)

ALPHA_S = 0.08 * 10 ** -0.8
ALPHA_I = 0.07 * 10 ** -0.8
DARK_S, DARK_I = 4e-5, 5e-5


def test_brightness_totals():
    b = SourceBrightness(0.04, 0.01, 0.02)
    assert (b.mu_s, b.mu_i) == (0.05, 0.06)
    split = SourceBrightness.from_totals(0.02, 0.05, 0.06)
    assert (split.mu_ns, split.mu_ni) == pytest.approx((0.03, 0.04), abs=1e-15)


def test_correlated_rate_examples():
    assert correlated_rate(0.0, 0.3, 0.2) == 0.0
    assert correlated_rate(0.04, 1.0, 1.0) == pytest.approx(0.01)
    assert correlated_rate(0.04, 0.01268, 0.01110) == pytest.approx(1.407e-6, abs=1e-9)


def test_accidental_rate_examples():
    assert accidental_rate(SourceBrightness(0.0), 0.5, 0.5, 0.0, 0.0) == 0.0
    b = SourceBrightness.from_totals(0.04, 0.05, 0.06)
    assert accidental_rate(b, 0.01268, 0.01110, DARK_S, DARK_I) == pytest.approx(1.36e-7, abs=2e-9)
    assert accidental_rate(b, 0.3, 0.2, 0.0, 0.0) == pytest.approx(b.mu_s * b.mu_i / 4 * 0.3 * 0.2, rel=1e-15)


def test_visibility_examples():
    assert visibility(3.0, 0.0) == 1.0
    assert visibility(2.0, 1.0) == 0.5
    b = SourceBrightness.from_totals(0.04, 0.05, 0.06)
    v = visibility(correlated_rate(0.04, ALPHA_S, ALPHA_I), accidental_rate(b, ALPHA_S, ALPHA_I, DARK_S, DARK_I))
    assert v == pytest.approx(0.838, abs=0.002)
    with pytest.raises(UndefinedVisibilityError):
        visibility(0.0, 0.0)


@given(r_c=st.floats(1e-12, 1.0), r_acc=st.floats(0.0, 1.0), phi=st.floats(-6, 6))
def test_visibility_is_fringe_contrast(r_c, r_acc, phi):
    hi = fringe_rate(r_c, r_acc, phi, phi)
    lo = fringe_rate(r_c, r_acc, phi + math.pi, phi)
    assert visibility(r_c, r_acc) == pytest.approx((hi - lo) / (hi + lo), rel=1e-9, abs=1e-12)


@given(r_c=st.floats(1e-9, 1.0), r_acc=st.floats(0.0, 1.0), k=st.floats(1e-6, 1e6))
def test_visibility_scale_invariant(r_c, r_acc, k):
    assert visibility(k * r_c, k * r_acc) == pytest.approx(visibility(r_c, r_acc), rel=1e-12)


def test_bell_margin():
    assert bell_violation_margin(1 / math.sqrt(2)) == 0.0
    assert bell_violation_margin(0.758) == pytest.approx(0.0509, abs=1e-4)
    assert bell_violation_margin(0.647) == pytest.approx(-0.0601, abs=1e-4)


def test_singles_rate_examples():
    assert singles_rate(0.0, 0.5, 0.0, 4e6) == 0.0
    back_to_back = singles_rate(0.05, 0.01268, 4e-5, 4e6)
    assert back_to_back == pytest.approx(2696, abs=1)
    assert 1500 / 2 <= back_to_back <= 1500 * 2
    span = singles_rate(0.05, 0.003185, 4e-5, 4e6)
    assert span == pytest.approx(797, abs=1)
    assert 430 / 2 <= span <= 430 * 2


def test_estimate_half_visibility_closed_form():
    a_s, a_i = 0.2, 0.1
    r_acc = accidental_rate(SourceBrightness(0.0, 0.05, 0.06), a_s, a_i, 0.0, 0.0)
    closed = 2 * r_acc * 4 / (a_s * a_i)
    assert estimate_mu_c(0.5, 0.05, 0.06, a_s, a_i, 0.0, 0.0) == pytest.approx(closed, abs=1e-11)


def test_estimate_measured_visibilities():
    cooled = estimate_mu_c(0.800, 0.05, 0.06, ALPHA_S, ALPHA_I, DARK_S, DARK_I)
    uncooled = estimate_mu_c(0.647, 0.05, 0.06, ALPHA_S, ALPHA_I, DARK_S, DARK_I)
    assert 0.03 <= cooled <= 0.05
    assert 0.012 <= uncooled <= 0.022


def test_estimate_errors():
    with pytest.raises(NoSolutionError):
        estimate_mu_c(1.0, 0.05, 0.06, ALPHA_S, ALPHA_I, DARK_S, DARK_I)
    with pytest.raises(ValueError):
        estimate_mu_c(1.2, 0.05, 0.06, ALPHA_S, ALPHA_I, DARK_S, DARK_I)
    with pytest.raises(NoSolutionError):
        estimate_mu_c(0.5, 0.05, 0.06, 0.0, 0.0, 0.0, 0.0)
    # accidentals so large that even mu_c = 1 cannot reach the target
    with pytest.raises(NoSolutionError):
        estimate_mu_c(0.999, 0.05, 0.06, 1e-6, 1e-6, 0.5, 0.5)


def test_estimate_round_trip_1000_draws():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        mu_c = rng.uniform(0.005, 0.1)
        mu_s, mu_i = mu_c + rng.uniform(0, 0.05), mu_c + rng.uniform(0, 0.05)
        a_s, a_i = rng.uniform(1e-3, 0.2, size=2)
        d_s, d_i = rng.uniform(0, 1e-4, size=2)
        r_acc = accidental_rate(SourceBrightness.from_totals(mu_c, mu_s, mu_i), a_s, a_i, d_s, d_i)
        v = visibility(correlated_rate(mu_c, a_s, a_i), r_acc)
        est = estimate_mu_c(v, mu_s, mu_i, a_s, a_i, d_s, d_i)
        assert est == pytest.approx(mu_c, rel=1e-9)
        assert visibility(correlated_rate(est, a_s, a_i), r_acc) == pytest.approx(v, abs=1e-9)


@settings(max_examples=50)
@given(
    x=st.lists(st.floats(0.0, 0.2), min_size=7, max_size=7),
    bump=st.integers(0, 6),
    delta=st.floats(1e-4, 0.1),
)
def test_rates_monotone_nondecreasing(x, bump, delta):
    def both(v):
        mu_c, mu_ns, mu_ni, a_s, a_i, d_s, d_i = v
        b = SourceBrightness(mu_c, mu_ns, mu_ni)
        return correlated_rate(mu_c, a_s, a_i), accidental_rate(b, a_s, a_i, d_s, d_i)

    y = list(x)
    y[bump] += delta
    (c0, a0), (c1, a1) = both(x), both(y)
    assert c1 >= c0 and a1 >= a0


def test_poisson_limit_visibility_rises_to_one():
    """No noise, no darks: multi-pair accidentals vanish faster than true coincidences."""
    mus = np.geomspace(0.5, 1e-6, 40)
    vs = []
    for mu_c in mus:
        b = SourceBrightness(mu_c)
        vs.append(visibility(correlated_rate(mu_c, ALPHA_S, ALPHA_I), accidental_rate(b, ALPHA_S, ALPHA_I, 0, 0)))
    assert np.all(np.diff(vs) > 0)
    assert vs[-1] == pytest.approx(1.0, abs=1e-5)
    # closed form under these assumptions: V = 1 / (1 + 2 mu_c)
    np.testing.assert_allclose(vs, 1 / (1 + 2 * mus), rtol=1e-12)
