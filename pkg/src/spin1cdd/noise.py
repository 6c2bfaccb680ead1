"""Ornstein-Uhlenbeck frequency noise.

The fluctuation ``dw(t)`` is a zero-mean stationary Gaussian process with
autocorrelation ``var * exp(-alpha |tau|)`` and Lorentzian spectrum. This
module evaluates its second-order statistics in closed form and by
quadrature, and samples it exactly (no time-step bias) together with its
time integral.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, signal

# Taylor branch for the integral variance below this value of alpha*dt.
_SMALL_ADT = 1e-3


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested accuracy."""

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(f"{message} (value={value:.6g}, error estimate={error_estimate:.3g})")
        self.value = value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class OuNoiseModel:
    """Stationary OU process.

    Parameters
    ----------
    variance : float
        Stationary variance ``var[dw]`` in (rad/s)^2.
    alpha : float
        Inverse correlation time in 1/s.
    """

    variance: float
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.variance) and self.variance >= 0):
            raise ValueError("variance must be finite and >= 0")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be finite and > 0")

    @property
    def correlation_time(self) -> float:
        return 1.0 / self.alpha


@dataclass(frozen=True)
class OuTrajectory:
    dt: float
    values: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    return t


def spectrum(model: OuNoiseModel, omega):
    """Lorentzian spectral density ``alpha var / (pi (alpha^2 + omega^2))``."""
    omega = np.asarray(omega, dtype=float)
    return model.alpha * model.variance / (np.pi * (model.alpha**2 + omega**2))


def autocorrelation(model: OuNoiseModel, tau):
    return model.variance * np.exp(-model.alpha * np.abs(np.asarray(tau, dtype=float)))


def phase_variance(model: OuNoiseModel, t):
    """Variance of the accumulated phase ``zeta(t) = int_0^t dw``.

    ``(2 var / alpha^2) (alpha t + exp(-alpha t) - 1)``
    """
    t = _check_time(t)
    x = model.alpha * t
    # x + expm1(-x) keeps accuracy for small alpha*t
    return 2.0 * model.variance / model.alpha**2 * (x + np.expm1(-x))


def filtered_phase_variance(model: OuNoiseModel, omega_e: float, t):
    """Mean of ``|chi(t)|^2`` where ``chi = int_0^t dw(t') exp(i omega_e t') dt'``.

    Reduces to :func:`phase_variance` at ``omega_e = 0``.
    """
    t = _check_time(t)
    if omega_e == 0:
        return phase_variance(model, t)
    a, w = model.alpha, float(omega_e)
    d = a * a + w * w
    decay = np.exp(-a * t)
    bracket = (a * t
               + (w * w - a * a) / d * (1.0 - decay * np.cos(w * t))
               - 2.0 * a * w * decay * np.sin(w * t) / d)
    return 2.0 * model.variance / d * bracket


def phase_variance_from_spectrum(spectral_fn: Callable[[float], float], t: float,
                                 alpha: float = 1.0, rtol: float = 1e-10,
                                 atol: float = 1e-14) -> float:
    """Phase variance from a spectral density through the sinc^2 filter.

    Evaluates ``2 int_0^inf [sin(w t/2) / (w/2)]^2 S(w) dw``. The first
    panel ``[0, pi/t]`` uses the filter directly; dyadic panels up to
    ``max(50/t, 50 alpha)`` and the remaining tail are integrated with the
    split ``4 S(w) (1 - cos w t) / w^2`` using QUADPACK's cosine-weighted
    rules. ``alpha`` only sets the panel range and need not match the
    spectrum exactly.

    Raises
    ------
    QuadratureError
        If the summed error estimate exceeds ``atol + rtol * |value|``.
    """
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 0.0

    def filt(w):
        return 2.0 * (t * np.sinc(w * t / (2.0 * np.pi)))**2 * spectral_fn(w)

    def smooth(w):
        return 4.0 * spectral_fn(w) / w**2

    w0 = np.pi / t
    w_max = max(50.0 / t, 50.0 * alpha, 2.0 * w0)
    total, err = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            pts = [alpha] if 0 < alpha < w0 else None
            v, e = integrate.quad(filt, 0.0, w0, points=pts, limit=200, epsabs=atol, epsrel=rtol)
            total += v
            err += e
            lo = w0
            while lo < w_max:
                hi = min(2.0 * lo, w_max)
                v1, e1 = integrate.quad(smooth, lo, hi, limit=200, epsabs=atol, epsrel=rtol)
                v2, e2 = integrate.quad(smooth, lo, hi, weight="cos", wvar=t, limit=200,
                                        epsabs=atol, epsrel=rtol)
                total += v1 - v2
                err += e1 + e2
                lo = hi
            v1, e1 = integrate.quad(smooth, w_max, np.inf, limit=200, epsabs=atol, epsrel=rtol)
            v2, e2 = integrate.quad(smooth, w_max, np.inf, weight="cos", wvar=t, limlst=100,
                                    epsabs=atol)
            total += v1 - v2
            err += e1 + e2
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature did not converge: {exc}", total, err) from None
    if err > atol + rtol * abs(total):
        raise QuadratureError("quadrature tolerance not reached", total, err)
    return total


def stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent random stream for trajectory ``index``.

    Counter-based Philox keyed by ``(master_seed, index)``, so a trajectory's
    samples do not depend on which worker draws them or in what order.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def _ar1(coeff: float, drive: np.ndarray) -> np.ndarray:
    # y[0] = drive[0]; y[k+1] = coeff * y[k] + drive[k+1]
    return signal.lfilter([1.0], [1.0, -coeff], drive)


def sample_trajectory(model: OuNoiseModel, dt: float, n_steps: int,
                      rng: np.random.Generator) -> OuTrajectory:
    """Exact stationary OU samples at ``t = 0, dt, ..., n_steps*dt``."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    decay = math.exp(-model.alpha * dt)
    kick = math.sqrt(model.variance * -math.expm1(-2.0 * model.alpha * dt))
    z = rng.standard_normal(n_steps + 1)
    z[0] *= math.sqrt(model.variance)
    z[1:] *= kick
    return OuTrajectory(dt, _ar1(decay, z))


def increment_covariance(model: OuNoiseModel, dt: float):
    """Transition statistics of ``(x(t+dt), int_t^{t+dt} x)`` given ``x(t)``.

    Returns ``(mean_coeffs, cov)``: the conditional mean is
    ``mean_coeffs * x(t)`` and ``cov`` is the 2x2 conditional covariance.
    """
    a, var = model.alpha, model.variance
    h = float(dt)
    ah = a * h
    e1 = -math.expm1(-ah)        # 1 - e^{-ah}
    e2 = -math.expm1(-2.0 * ah)  # 1 - e^{-2ah}
    diff = 2.0 * a * var         # OU diffusion constant
    var_x = var * e2
    cov_xi = diff / (2.0 * a * a) * e1 * e1
    if ah < _SMALL_ADT:
        var_i = diff * h**3 * (1.0 / 3.0 - ah / 4.0 + 7.0 * ah**2 / 60.0 - ah**3 / 24.0)
    else:
        var_i = diff / a**2 * (h - 2.0 * e1 / a + e2 / (2.0 * a))
    mean_coeffs = np.array([1.0 - e1, e1 / a])
    cov = np.array([[var_x, cov_xi], [cov_xi, var_i]])
    return mean_coeffs, cov


def _cholesky_2x2(cov: np.ndarray) -> np.ndarray:
    # tolerant of the exactly singular var = 0 case
    l11 = math.sqrt(max(cov[0, 0], 0.0))
    l21 = cov[1, 0] / l11 if l11 > 0 else 0.0
    l22 = math.sqrt(max(cov[1, 1] - l21 * l21, 0.0))
    return np.array([[l11, 0.0], [l21, l22]])


def integrated_phase_increments(model: OuNoiseModel, dt: float, n_steps: int,
                                rng: np.random.Generator):
    """Jointly exact samples of the noise and its step integrals.

    Returns
    -------
    values : ndarray, shape (n_steps + 1,)
        ``dw`` at ``t = 0, dt, ..., n_steps*dt``, stationary start.
    increments : ndarray, shape (n_steps,)
        ``int_{t_k}^{t_k+1} dw(t') dt'`` for each step.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    coeffs, cov = increment_covariance(model, dt)
    chol = _cholesky_2x2(cov)
    z0 = rng.standard_normal()
    z = rng.standard_normal((n_steps, 2))
    kicks = z @ chol.T
    drive = np.concatenate(([math.sqrt(model.variance) * z0], kicks[:, 0]))
    values = _ar1(coeffs[0], drive)
    incs = coeffs[1] * values[:-1] + kicks[:, 1]
    return values, incs
