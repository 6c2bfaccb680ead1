import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from spin1cdd import noise
from spin1cdd.noise import OuNoiseModel

UNIT = OuNoiseModel(1.0, 1.0)


def kernel_double_quad(model, omega_e, t):
    """Brute-force oracle: var * int int exp(-a|s-u|) cos(w (s-u)) over [0, t]^2."""
    f = lambda u, s: math.exp(-model.alpha * abs(s - u)) * math.cos(omega_e * (s - u))
    lo, _ = integrate.dblquad(f, 0, t, 0, lambda s: s, epsabs=1e-13, epsrel=1e-12)
    hi, _ = integrate.dblquad(f, 0, t, lambda s: s, t, epsabs=1e-13, epsrel=1e-12)
    return model.variance * (lo + hi)


@pytest.mark.parametrize("kw", [dict(variance=-1, alpha=1), dict(variance=1, alpha=0),
                                dict(variance=1, alpha=-2), dict(variance=math.inf, alpha=1)])
def test_model_invariants(kw):
    with pytest.raises(ValueError):
        OuNoiseModel(**kw)


def test_spectrum_values():
    assert noise.spectrum(OuNoiseModel(1, 2), 0.0) == pytest.approx(0.1591549, abs=1e-7)
    assert noise.spectrum(UNIT, 1.0) == pytest.approx(0.1591549, abs=1e-7)


@given(st.floats(-1e3, 1e3))
def test_spectrum_even(w):
    m = OuNoiseModel(2.5, 0.3)
    assert noise.spectrum(m, w) == noise.spectrum(m, -w)


def test_spectrum_integrates_to_variance():
    m = OuNoiseModel(2.0, 0.7)
    total, _ = integrate.quad(lambda w: noise.spectrum(m, w), -np.inf, np.inf, epsabs=1e-12)
    assert total == pytest.approx(2.0, rel=1e-9)


def test_autocorrelation():
    assert noise.autocorrelation(UNIT, 0.0) == 1.0
    assert noise.autocorrelation(UNIT, 1.0) == pytest.approx(0.3678794, abs=1e-7)
    assert noise.autocorrelation(UNIT, -2.3) == noise.autocorrelation(UNIT, 2.3)


@pytest.mark.parametrize("w", np.linspace(0, 10, 11))
def test_wiener_khinchin(w):
    m = OuNoiseModel(1.3, 1.0)
    # (1/2pi) int G(tau) e^{-i w tau} dtau = (1/pi) int_0^inf G(tau) cos(w tau) dtau
    ft, _ = integrate.quad(lambda tau: noise.autocorrelation(m, tau), 0, np.inf, weight="cos", wvar=w) \
        if w > 0 else integrate.quad(lambda tau: noise.autocorrelation(m, tau), 0, np.inf)
    assert ft / np.pi == pytest.approx(noise.spectrum(m, w), rel=1e-6)


def test_phase_variance_values():
    assert noise.phase_variance(UNIT, 0.0) == 0.0
    assert noise.phase_variance(UNIT, 1.0) == pytest.approx(0.7357589, abs=1e-7)
    assert noise.phase_variance(UNIT, 1.0) == pytest.approx(kernel_double_quad(UNIT, 0.0, 1.0), rel=1e-10)
    t = 200.0
    assert noise.phase_variance(UNIT, t) == pytest.approx(2 * t - 2, rel=1e-14)
    with pytest.raises(ValueError):
        noise.phase_variance(UNIT, -1.0)


@given(st.floats(1e-3, 10), st.floats(1e-3, 10))
def test_phase_variance_monotone(alpha, var):
    m = OuNoiseModel(var, alpha)
    t = np.linspace(0, 20 / alpha, 400)
    v = noise.phase_variance(m, t)
    assert np.all(v >= 0)
    assert np.all(np.diff(v) >= 0)


def test_phase_variance_small_time_precision():
    # alpha t = 1e-9: leading term var t^2 must survive cancellation
    m = OuNoiseModel(1.0, 1.0)
    assert noise.phase_variance(m, 1e-9) == pytest.approx(1e-18, rel=1e-6)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0, 37.0])
@pytest.mark.parametrize("alpha", [0.01, 1.0, 20.0])
def test_phase_variance_from_spectrum(t, alpha):
    m = OuNoiseModel(1.0, alpha)
    got = noise.phase_variance_from_spectrum(lambda w: noise.spectrum(m, w), t, alpha=alpha)
    assert got == pytest.approx(float(noise.phase_variance(m, t)), rel=1e-8)


def test_phase_variance_from_spectrum_limits():
    spec = lambda w: noise.spectrum(UNIT, w)
    assert noise.phase_variance_from_spectrum(spec, 0.0) == 0.0
    assert noise.phase_variance_from_spectrum(spec, 1.0) == pytest.approx(0.7357589, abs=1e-7)
    assert noise.phase_variance_from_spectrum(spec, 100.0) == pytest.approx(2 * np.pi * spec(0) * 100, rel=0.02)


def test_phase_variance_from_spectrum_reports_failure():
    # a spectrum with a non-integrable singularity at the panel edge
    bad = lambda w: 1.0 / abs(w - np.pi) ** 1.2
    with pytest.raises(noise.QuadratureError) as info:
        noise.phase_variance_from_spectrum(bad, 1.0)
    assert math.isfinite(info.value.error_estimate) or info.value.error_estimate == math.inf


def test_filtered_phase_variance_examples():
    m = OuNoiseModel(1.0, 0.1)
    assert noise.filtered_phase_variance(m, 1.0, 0.0) == 0.0
    assert noise.filtered_phase_variance(m, 1.0, 10.0) == pytest.approx(4.5988, abs=5e-5)
    for w, t in [(1.0, 10.0), (2.0, 10.0), (0.3, 4.0)]:
        assert noise.filtered_phase_variance(m, w, t) == pytest.approx(kernel_double_quad(m, w, t), rel=1e-10)


@given(st.floats(0, 50))
def test_filtered_reduces_to_phase_variance(t):
    assert noise.filtered_phase_variance(UNIT, 0.0, t) == noise.phase_variance(UNIT, t)
    near = noise.filtered_phase_variance(UNIT, 1e-7, t)
    assert near == pytest.approx(float(noise.phase_variance(UNIT, t)), rel=1e-6, abs=1e-12)


@pytest.mark.parametrize("alpha,w", [(0.1, 1.0), (1.0, 1.0), (10.0, 2.0), (0.5, 5.0)])
def test_filtered_long_time_slope(alpha, w):
    m = OuNoiseModel(1.0, alpha)
    t1, t2 = 10 / alpha, 10 / alpha + 2 * np.pi / w * 50
    slope = (noise.filtered_phase_variance(m, w, t2) - noise.filtered_phase_variance(m, w, t1)) / (t2 - t1)
    assert slope == pytest.approx(2 * np.pi * noise.spectrum(m, w), rel=0.01)


def test_stream_independence_and_reproducibility():
    a = noise.stream(7, 3).standard_normal(5)
    assert np.array_equal(a, noise.stream(7, 3).standard_normal(5))
    assert not np.array_equal(a, noise.stream(7, 4).standard_normal(5))
    assert not np.array_equal(a, noise.stream(8, 3).standard_normal(5))


def test_sample_trajectory_zero_variance():
    tr = noise.sample_trajectory(OuNoiseModel(0.0, 1.0), 0.1, 100, noise.stream(1, 0))
    assert np.all(tr.values == 0.0)
    assert tr.times[-1] == pytest.approx(10.0)


def test_sample_trajectory_statistics():
    m = OuNoiseModel(2.0, 1.0)
    dt, n = 0.05, 100_000
    x = noise.sample_trajectory(m, dt, n, noise.stream(11, 0)).values
    rho = math.exp(-m.alpha * dt)
    # effective sample size of an AR(1) chain for the variance estimator
    n_eff = n * (1 - rho**2) / (1 + rho**2)
    assert abs(x.var() - m.variance) < 3 * m.variance * math.sqrt(2 / n_eff)
    lag1 = np.mean(x[:-1] * x[1:]) / np.mean(x * x)
    assert abs(lag1 - rho) < 3 * math.sqrt((1 - rho**2) * (1 + rho**2) / ((1 - rho**2) * n) + (1 - rho**2) / n)
    assert abs(x.mean()) < 3 * math.sqrt(m.variance * (1 + rho) / (1 - rho) / n)


def test_sample_trajectory_bit_reproducible():
    m = OuNoiseModel(1.0, 0.3)
    a = noise.sample_trajectory(m, 0.1, 500, noise.stream(5, 9)).values
    b = noise.sample_trajectory(m, 0.1, 500, noise.stream(5, 9)).values
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("alpha,dt", [(1.0, 0.1), (1.0, 1e-5), (3.0, 2.0), (0.2, 1e-3 / 0.2)])
def test_increment_covariance_consistency(alpha, dt):
    # unconditional moments over a stationary start must match the closed forms
    m = OuNoiseModel(1.7, alpha)
    coeffs, cov = noise.increment_covariance(m, dt)
    var_i = coeffs[1] ** 2 * m.variance + cov[1, 1]
    assert var_i == pytest.approx(float(noise.phase_variance(m, dt)), rel=1e-9)
    cov_xi = coeffs[0] * coeffs[1] * m.variance + cov[0, 1]
    assert cov_xi == pytest.approx(m.variance * -math.expm1(-alpha * dt) / alpha, rel=1e-12)
    var_x = coeffs[0] ** 2 * m.variance + cov[0, 0]
    assert var_x == pytest.approx(m.variance, rel=1e-12)
    assert np.linalg.eigvalsh(cov).min() >= -1e-15 * cov.max()


def test_increment_covariance_branch_continuity():
    m = OuNoiseModel(1.0, 1.0)
    edge = noise._SMALL_ADT
    below = noise.increment_covariance(m, edge * (1 - 1e-9))[1][1, 1]
    above = noise.increment_covariance(m, edge * (1 + 1e-9))[1][1, 1]
    assert below == pytest.approx(above, rel=1e-6)


def test_integrated_increments_zero_variance():
    vals, incs = noise.integrated_phase_increments(OuNoiseModel(0.0, 1.0), 0.1, 20, noise.stream(0, 0))
    assert np.all(vals == 0) and np.all(incs == 0)


def test_integrated_increments_statistics():
    n = 10_000
    zeta = np.array([noise.integrated_phase_increments(UNIT, 0.1, 10, noise.stream(3, i))[1].sum()
                     for i in range(n)])
    target = float(noise.phase_variance(UNIT, 1.0))
    assert target == pytest.approx(0.7358, abs=1e-4)
    assert abs(zeta.var(ddof=1) - target) < 3 * target * math.sqrt(2 / (n - 1))
    assert abs(zeta.mean()) < 3 * math.sqrt(target / n)


@settings(deadline=None, max_examples=10)
@given(st.sampled_from([1, 2, 5, 10]))
def test_integrated_increments_step_size_free(k):
    # variance at t = 1 is the same whatever the number of steps
    n = 4000
    zeta = np.array([noise.integrated_phase_increments(UNIT, 1.0 / k, k, noise.stream(k, i))[1].sum()
                     for i in range(n)])
    target = float(noise.phase_variance(UNIT, 1.0))
    assert abs(zeta.var(ddof=1) - target) < 4 * target * math.sqrt(2 / (n - 1))
