import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from vhetnet.channel import (
    fit_los_parameters,
    fitted_los_probability,
    itu_los_probability,
    los_clamp_distances,
    los_probability_of_distance,
    nlos_probability_of_distance,
    received_power,
    sample_aerial_interferer_gain,
    sample_nakagami_power,
    terrestrial_gain,
)
from vhetnet.config import ENVIRONMENTS, ITU_ENVIRONMENTS, Environment, Tier, default_params

URBAN = ENVIRONMENTS["urban"]


def _itu_oracle(z, h_tx, h_rx, env):
    mp.mp.dps = 40
    m = math.floor(z * math.sqrt(env.alpha * env.beta) / 1000 - 1)
    prod = mp.mpf(1)
    for n in range(m + 1):
        h = mp.mpf(h_tx) - (n + mp.mpf("0.5")) * (h_tx - h_rx) / (m + 1)
        prod *= 1 - mp.exp(-h * h / (2 * mp.mpf(env.delta) ** 2))
    return float(prod)


def test_itu_empty_product():
    assert itu_los_probability(1.0, 19, 10_000, ITU_ENVIRONMENTS["urban"]) == 1.0


@pytest.mark.parametrize("z", [500.0, 2_000.0, 40_000.0])
def test_itu_against_high_precision_product(z):
    env = ITU_ENVIRONMENTS["urban"]
    assert itu_los_probability(z, 19, 10_000, env) == pytest.approx(_itu_oracle(z, 19, 10_000, env), rel=1e-10)


def test_itu_monotone_in_distance():
    z = np.linspace(0, 50_000, 400)
    for env in ITU_ENVIRONMENTS.values():
        p = itu_los_probability(z, 30, 10_000, env)
        assert np.all(np.diff(p) <= 1e-15)


def test_fitted_examples():
    assert fitted_los_probability(10.0, URBAN) == pytest.approx(1 - math.exp(-1.51), abs=1e-12)
    assert fitted_los_probability(10.0, URBAN) == pytest.approx(0.77909, abs=1e-5)
    flat = Environment("flat", 0.0, 1.0, 0.8, 10.0)
    np.testing.assert_allclose(fitted_los_probability(np.array([1.0, 45.0, 89.0]), flat), 0.8)
    sub = ENVIRONMENTS["suburban"]
    assert fitted_los_probability(2.0, sub) == pytest.approx(1 - math.exp(-13.162), abs=1e-15)


def test_fitted_clamped_for_highrise():
    p = fitted_los_probability(np.linspace(0, 90, 181), ENVIRONMENTS["highrise_urban"])
    assert p.min() >= 0.0 and p.max() <= 1.0 and p.max() == 1.0


@given(st.floats(0.01, 5), st.floats(1e-3, 2), st.floats(0.5, 1.2))
def test_fitted_nondecreasing(a, b, c):
    env = Environment("x", a, b, c, 10.0)
    p = fitted_los_probability(np.linspace(0, 90, 91), env)
    assert np.all(np.diff(p) >= 0)


def test_distance_form_limits_and_example():
    p = default_params(h_U=49.0)  # h_UT = 29
    p30 = default_params(h_U=50.0)
    assert los_probability_of_distance(30.0, p30) == pytest.approx(1 - math.exp(-0.151 * 45), rel=1e-12)
    assert los_probability_of_distance(1e-9, p) == pytest.approx(1 - math.exp(-0.151 * 90), rel=1e-9)
    assert los_probability_of_distance(1e12, p) == pytest.approx(0.0, abs=1e-9)


@given(st.floats(0, 1e6))
def test_los_nlos_complement(z):
    p = default_params()
    assert los_probability_of_distance(z, p) + nlos_probability_of_distance(z, p) == 1.0


def test_los_only_regime():
    p = default_params(los_only=True)
    assert los_probability_of_distance(1234.0, p) == 1.0
    assert los_clamp_distances(p) == []


def test_clamp_distance_for_highrise():
    p = default_params(environment="highrise_urban", h_T=62, h_U=100)
    z_one, z_zero = los_clamp_distances(p)
    assert los_probability_of_distance(z_one * 0.999, p) == 1.0
    assert los_probability_of_distance(z_one * 1.01, p) < 1.0
    assert los_probability_of_distance(z_zero * 0.99, p) > 0.0
    assert los_probability_of_distance(z_zero * 1.01, p) == 0.0


def test_fit_urban_close_to_table():
    fit = fit_los_parameters(ITU_ENVIRONMENTS["urban"], 19.0)
    assert fit.residual_rms < 0.02
    assert fit.a == pytest.approx(1.0, abs=0.05) and fit.c == pytest.approx(1.0, abs=0.05)
    assert fit.b == pytest.approx(0.151, rel=0.1)


def test_fit_highrise_close_to_table():
    fit = fit_los_parameters(ITU_ENVIRONMENTS["highrise_urban"], 62.0)
    assert (fit.a, fit.c) == pytest.approx((1.124, 1.024), abs=0.05)
    assert fit.b == pytest.approx(0.049, rel=0.1)


def test_fit_recovers_synthetic_target():
    theta = np.arange(0.5, 90.01, 0.5)
    target = 1.05 - 0.9 * np.exp(-0.08 * theta)
    fit = fit_los_parameters(ITU_ENVIRONMENTS["urban"], 19.0, target=target)
    assert (fit.a, fit.b, fit.c) == pytest.approx((0.9, 0.08, 1.05), abs=1e-6)


def test_terrestrial_gain_modes():
    p = default_params(h_U=60.0, h_T=20.0)
    r = np.array([5.0, 50.0, 500.0])
    np.testing.assert_array_equal(terrestrial_gain(r, p), p.g_s_T)
    # user above the BS while the beam points down: mainlobe condition is never met
    np.testing.assert_array_equal(terrestrial_gain(r, p, tilt=10, beamwidth_T=30), p.g_s_T)
    # beam pointing up
    g = terrestrial_gain(np.array([10.0, 200.0]), p, tilt=-20, beamwidth_T=30)
    assert set(np.unique(g)) <= {p.g_s_T, p.G_m_T}
    assert g[1] == p.G_m_T or g[0] == p.G_m_T


def test_aerial_gain_sampler():
    rng = np.random.default_rng(3)
    p = default_params()
    g = sample_aerial_interferer_gain(p, rng, 1_000_000)
    assert np.mean(g == p.G_m_A) == pytest.approx(0.1, abs=0.001)
    assert np.all(sample_aerial_interferer_gain(default_params(theta_B_A=180), rng, 100) == p.G_m_A)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_nakagami_unit_mean(m):
    h = sample_nakagami_power(m, np.random.default_rng(m), 200_000)
    se = math.sqrt(1 / m / h.size)
    assert abs(h.mean() - 1) < 3 * se


def test_nakagami_moments():
    rng = np.random.default_rng(11)
    assert sample_nakagami_power(1, rng, 1_000_000).mean() == pytest.approx(1.0, abs=0.01)
    assert sample_nakagami_power(2, rng, 1_000_000).var() == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ValueError):
        sample_nakagami_power(0, rng, 3)


def test_received_power():
    p = default_params(alpha_A=2.0, eta_A_dB=0.0)
    assert received_power(Tier.A, 1.0, 1.0, 1.0, p) == pytest.approx(p.P_A)
    assert received_power(Tier.A, 2.0, 1.0, 1.0, p) == pytest.approx(p.P_A / 4)
    d = default_params()
    expected = 10 ** (4.3 - 3) * 10 ** (-0.3 - 1.5) * 100 ** (-2.5)
    assert received_power(Tier.L, 100.0, d.g_s_T, 1.0, d) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        received_power(Tier.L, 0.0, 1.0, 1.0, d)
