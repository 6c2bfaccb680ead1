"""Acceptance checks shared by ``spin1cdd validate`` and the test suite.

Every check returns a :class:`Check` with the measured quantity and the
tolerance it was held to. Wall-clock budgets are enforced but only their
pass/fail outcome enters the report, so two runs with the same seed write
byte-identical JSON.
"""

from __future__ import annotations

import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import __version__, analytic, montecarlo as mc, noise
from .noise import OuNoiseModel

SLOW_NOISE_SPOT = {1.0: 4.5988, 2.0: 0.9038}


@dataclass
class Check:
    id: int
    name: str
    passed: bool
    measured: dict
    tolerance: dict
    detail: str = ""


@dataclass
class Settings:
    seed: int = mc.DEFAULT_SEED
    quick: bool = False
    workers: int = 1
    inject_fault: str | None = None
    spectral_density: Callable = field(default=noise.spectrum, repr=False)

    def __post_init__(self):
        if self.inject_fault not in (None, "spectrum"):
            raise ValueError(f"unknown fault {self.inject_fault!r}")
        if self.inject_fault == "spectrum":
            # wrong normalisation constant: 3 in place of pi
            self.spectral_density = lambda model, w: noise.spectrum(model, w) * np.pi / 3.0


def _f(x) -> float:
    return float(f"{float(x):.12g}")


def correlation_kernel_oracle(alpha: float, omega_e: float, t: float) -> float:
    """Adaptive double quadrature of ``exp(-alpha|s-u|) cos(omega_e (s-u))`` over ``[0, t]^2``.

    The square is split along the diagonal where the kernel has a kink.
    """
    def kern(u, s):
        return math.exp(-alpha * abs(s - u)) * math.cos(omega_e * (s - u))

    lower, _ = integrate.dblquad(kern, 0, t, 0, lambda s: s, epsabs=1e-13, epsrel=1e-12)
    upper, _ = integrate.dblquad(kern, 0, t, lambda s: s, t, epsabs=1e-13, epsrel=1e-12)
    return lower + upper


def _scaled_transfer(alpha: float, omega_e: float, t) -> np.ndarray:
    model = OuNoiseModel(1.0, alpha)
    est = analytic.cdd_transfer(omega_e, 0, 1, model, t)
    return est.probability / (analytic.fx_element(0, 1) ** 2 * model.variance)


def check_slow_noise_transfer(s: Settings) -> Check:
    start = time.perf_counter()
    t = np.linspace(0.0, 10.0, 1001)
    curves = {w: _scaled_transfer(0.1, w, t) for w in SLOW_NOISE_SPOT}
    elapsed = time.perf_counter() - start
    measured, ok = {}, elapsed < 1.0
    for w, ref in SLOW_NOISE_SPOT.items():
        oracle = correlation_kernel_oracle(0.1, w, 10.0)
        value = curves[w][-1]
        rel = abs(value - oracle) / oracle
        ok &= rel < 1e-4 and abs(value - ref) < 5e-5
        measured[f"omega_e={w:g}"] = {"p_over_a": _f(value), "oracle": _f(oracle), "rel_err": _f(rel)}
    measured["runtime_within_budget"] = bool(elapsed < 1.0)
    print(f"[validate] slow-noise transfer curves computed in {elapsed:.4f} s", file=sys.stderr)
    return Check(1, "slow_noise_transfer_curves", bool(ok), measured,
                 {"rel_err": 1e-4, "spot_abs": 5e-5, "runtime_s": 1.0})


def check_fast_noise_transfer(s: Settings) -> Check:
    model = OuNoiseModel(1.0, 10.0)
    el = analytic.fx_element(0, 1) ** 2
    r1 = analytic.cdd_transfer_rate_longtime(1.0, model, el)
    r2 = analytic.cdd_transfer_rate_longtime(2.0, model, el)
    ratio = r1 / r2
    rel = abs(ratio - 104.0 / 101.0) / (104.0 / 101.0)
    t = np.linspace(1.0, 10.0, 901)
    a, b = _scaled_transfer(10.0, 1.0, t), _scaled_transfer(10.0, 2.0, t)
    gap = float(np.max(np.abs(a - b) / np.maximum(a, b)))
    ok = rel < 1e-6 and gap < 0.05
    return Check(2, "fast_noise_transfer_curves", bool(ok),
                 {"slope_ratio": _f(ratio), "slope_ratio_rel_err": _f(rel), "max_pointwise_gap": _f(gap)},
                 {"slope_ratio_rel_err": 1e-6, "max_pointwise_gap": 0.05, "t_range": [1.0, 10.0]})


def check_static_limit(s: Settings) -> Check:
    model = OuNoiseModel(1.0, 1e-6)
    el = analytic.fx_element(0, 1) ** 2
    measured, ok = {}, True
    for w in (1.0, 2.0):
        t = np.linspace(0.0, 20.0 / w, 4001)[1:]
        p = analytic.cdd_transfer(w, 0, 1, model, t).probability
        static = analytic.cdd_transfer_static_limit(w, model.variance, el, t)
        rel = float(np.max(np.abs(p - static)) / np.max(static))
        ok &= rel < 1e-3
        measured[f"omega_e={w:g}"] = _f(rel)
    return Check(3, "static_limit_identity", bool(ok), measured,
                 {"sup_norm_rel_diff": 1e-3},
                 "relative to the peak of the static curve; pointwise ratios are undefined at its zeros")


def check_asymptotic_dephasing(s: Settings) -> Check:
    model = OuNoiseModel(1.0, 1.0)
    tau_c = model.correlation_time
    s0 = float(s.spectral_density(model, 0.0))
    rho0 = analytic.pure_state([1.0, 1.0, 1.0])
    measured, ok = {}, True
    for m, mp in ((1, 0), (1, -1)):
        dm2 = (m - mp) ** 2
        t_long = np.linspace(20 * tau_c, 40 * tau_c, 201)
        mag = np.abs(analytic.coherence_free(rho0, m, mp, t_long, model))
        slope = np.polyfit(t_long, np.log(mag), 1)[0]
        expected = -dm2 * np.pi * s0
        rel_long = abs(slope - expected) / abs(expected)
        t_short = np.linspace(0.0, tau_c / 100, 101)[1:]
        ratio = np.abs(analytic.coherence_free(rho0, m, mp, t_short, model)) / abs(rho0[1 - m, 1 - mp])
        gauss = analytic.coherence_slow_limit(m, mp, t_short, model.variance)
        rel_short = float(np.max(np.abs(ratio - gauss) / gauss))
        ok &= rel_long < 0.01 and rel_short < 1e-3
        measured[f"dm={m - mp}"] = {"fitted_slope": _f(slope), "expected_slope": _f(expected),
                                    "slope_rel_err": _f(rel_long), "short_time_rel_err": _f(rel_short)}
    return Check(4, "asymptotic_dephasing", bool(ok), measured,
                 {"slope_rel_err": 0.01, "short_time_rel_err": 1e-3})


def check_sinc_filter(s: Settings) -> Check:
    model = OuNoiseModel(1.0, 1.0)
    spec = lambda w: s.spectral_density(model, w)
    measured, ok = {}, True
    for t in (0.1, 1.0, 10.0):
        num = noise.phase_variance_from_spectrum(spec, t, alpha=model.alpha)
        ref = float(noise.phase_variance(model, t))
        rel = abs(num - ref) / ref
        ok &= rel < 1e-6
        measured[f"t={t:g}"] = _f(rel)
    t = 100.0 * model.correlation_time
    num = noise.phase_variance_from_spectrum(spec, t, alpha=model.alpha)
    delta = 2.0 * np.pi * float(spec(0.0)) * t
    rel = abs(num - delta) / delta
    ok &= rel < 0.02
    measured["dirac_asymptote_t=100"] = _f(rel)
    return Check(5, "sinc2_filter_consistency", bool(ok), measured,
                 {"rel_err": 1e-6, "dirac_asymptote_rel_err": 0.02})


def check_mc_free(s: Settings) -> Check:
    model = OuNoiseModel(1.0, 1.0)
    n = 2000 if s.quick else 10_000
    rho0 = analytic.pure_state([1.0, 1.0, 0.0])
    start = time.perf_counter()
    cfg = mc.config_for_grid(5.0, 50, 5.0 / 49, n, s.seed, mc.Frame.FREE, s.workers)
    res = mc.simulate_free(rho0, model, 0.0, cfg)
    elapsed = time.perf_counter() - start
    an = np.abs(analytic.coherence_free(rho0, 1, 0, res.times, model))
    dev = np.abs(np.abs(res.mean[:, 0, 1]) - an)
    allowed = 3.0 * res.stderr[:, 0, 1] + 1e-12
    worst = float(np.max(dev / allowed))
    ok = worst <= 1.0 and elapsed < 30.0
    print(f"[validate] free-dephasing ensemble ({n} paths) in {elapsed:.2f} s", file=sys.stderr)
    return Check(6, "mc_free_dephasing", bool(ok),
                 {"n_trajectories": n, "max_dev_over_3se": _f(worst),
                  "runtime_within_budget": bool(elapsed < 30.0)},
                 {"n_se": 3, "runtime_s": 30.0})


def check_mc_cdd(s: Settings) -> Check:
    model = OuNoiseModel(0.0025, 0.1)
    omega_d = 1.0
    n = 500 if s.quick else 2000
    cfg = mc.config_for_grid(20.0, 81, mc.rotated_cdd_dt_bound(model, omega_d), n,
                             s.seed, mc.Frame.CDD_ROTATED, s.workers)
    states = analytic.dressed_basis(omega_d, 0.0).rotated_states()
    # dressed order (x, y, z) is m~ = (0, +1, -1) at zero epsilon
    res = mc.simulate_cdd_rotated(states[0], model, omega_d, 0.0, cfg)
    measured, ok = {"n_trajectories": n, "dt": _f(cfg.dt)}, True
    for col, mtp in ((1, 1), (2, -1)):
        p = analytic.cdd_transfer(omega_d, 0, mtp, model, res.times).probability
        allowed = np.maximum(0.1 * p, 3.0 * res.stderr[:, col]) + 1e-12
        worst = float(np.max(np.abs(res.mean[:, col] - p) / allowed))
        ok &= worst <= 1.0
        measured[f"0->{mtp:+d}_max_dev_over_tol"] = _f(worst)
    res2 = mc.simulate_cdd_rotated(states[1], model, omega_d, 0.0, cfg)
    p1 = analytic.cdd_transfer(omega_d, 1, 0, model, res2.times).probability
    bound = 10.0 * p1 * model.variance / omega_d**2
    worst2 = float(np.max(res2.mean[1:, 2] / bound[1:]))
    ok &= worst2 < 1.0
    measured["+1->-1_max_over_bound"] = _f(worst2)
    return Check(7, "mc_cdd_transfer", bool(ok), measured,
                 {"rel": 0.1, "n_se": 3, "second_order_bound": "10 * P(dm=1) * var / omega_e^2"})


def check_dressed(s: Settings) -> Check:
    worst_res = worst_coef = worst_orth = 0.0
    for omega_d in (1.0, 2.5):
        for ratio in (0.0, 0.01, 0.1, 0.5, 1.0):
            b = analytic.dressed_basis(omega_d, ratio * omega_d)
            nb = analytic.numeric_dressed_basis(omega_d, ratio * omega_d)
            worst_res = max(worst_res, float(b.residuals().max()))
            worst_coef = max(worst_coef, float(np.abs(b.coeffs - nb.coeffs).max()),
                             float(np.abs(b.omegas - nb.omegas).max()))
            worst_orth = max(worst_orth, float(np.abs(b.coeffs @ b.coeffs.T - np.eye(3)).max()))
    b0 = analytic.dressed_basis(1.0, 0.0)
    exact = max(float(np.abs(b0.omegas - [0.0, 1.0, -1.0]).max()),
                float(np.abs(b0.coeffs[0] - [2**-0.5, 0.0, -(2**-0.5)]).max()))
    ok = worst_res < 1e-10 and worst_coef < 1e-10 and worst_orth < 1e-10 and exact < 1e-12
    return Check(8, "quadratic_zeeman_eigensystem", bool(ok),
                 {"max_residual": _f(worst_res), "max_coeff_diff": _f(worst_coef),
                  "max_orthonormality_err": _f(worst_orth), "eps0_exact_err": _f(exact)},
                 {"residual": 1e-10, "coeff_diff": 1e-10, "eps0_exact": 1e-12})


def rwa_discrepancy(ratio: float, omega_d: float = 1.0, points: int = 201) -> float:
    """Max dressed-population gap between lab and rotated frames, noiseless."""
    model = OuNoiseModel(0.0, 1.0)
    psi0 = np.ones(3) / np.sqrt(3.0)
    omega0 = ratio * omega_d
    t_max = 20.0 / omega_d
    lab_cfg = mc.config_for_grid(t_max, points, mc.lab_cdd_dt_bound(omega0), 1, frame=mc.Frame.CDD_LAB)
    rot_cfg = mc.config_for_grid(t_max, points, mc.rotated_cdd_dt_bound(model, omega_d), 1,
                                 frame=mc.Frame.CDD_ROTATED)
    lab = mc.simulate_cdd_lab(psi0, model, omega0, omega_d, omega0, 0.0, lab_cfg)
    rot = mc.simulate_cdd_rotated(psi0, model, omega_d, 0.0, rot_cfg)
    return float(np.max(np.abs(lab.mean - rot.mean)))


def check_rwa(s: Settings) -> Check:
    d100 = rwa_discrepancy(100.0)
    d200 = rwa_discrepancy(200.0)
    ok = d100 < 2e-2 and d200 < d100
    return Check(9, "rwa_convergence", bool(ok),
                 {"discrepancy_ratio100": _f(d100), "discrepancy_ratio200": _f(d200)},
                 {"abs": 2e-2, "strictly_decreasing": True})


def check_determinism(s: Settings) -> Check:
    n = 2 * mc.CHUNK_SIZE + 17
    rho0 = analytic.pure_state([1.0, 1.0, 1.0])
    model = OuNoiseModel(1.0, 1.0)
    free = [mc.simulate_free(rho0, model, 0.1, mc.TrajectoryConfig(0.1, 2.0, n, s.seed, "free", 1, w))
            for w in (1, 4, 1)]
    cdd_model = OuNoiseModel(0.0025, 0.1)
    cfg = lambda w: mc.config_for_grid(5.0, 11, mc.rotated_cdd_dt_bound(cdd_model, 1.0), n, s.seed,
                                       mc.Frame.CDD_ROTATED, w)
    psi0 = analytic.dressed_basis(1.0).rotated_states()[0]
    cdd = [mc.simulate_cdd_rotated(psi0, cdd_model, 1.0, 0.0, cfg(w)) for w in (1, 4)]

    def same(a, b):
        return a.mean.tobytes() == b.mean.tobytes() and a.stderr.tobytes() == b.stderr.tobytes()

    workers_ok = same(free[0], free[1]) and same(cdd[0], cdd[1])
    rerun_ok = same(free[0], free[2])
    return Check(10, "determinism", bool(workers_ok and rerun_ok),
                 {"worker_count_independent": bool(workers_ok), "rerun_identical": bool(rerun_ok)},
                 {"bit_identical": True})


CHECKS = (check_slow_noise_transfer, check_fast_noise_transfer, check_static_limit, check_asymptotic_dephasing,
          check_sinc_filter, check_mc_free, check_mc_cdd, check_dressed, check_rwa,
          check_determinism)


def run_validation(seed: int = mc.DEFAULT_SEED, quick: bool = False, workers: int = 1,
                   inject_fault: str | None = None) -> dict:
    s = Settings(seed=seed, quick=quick, workers=workers, inject_fault=inject_fault)
    checks = []
    for fn in CHECKS:
        try:
            checks.append(fn(s))
        except Exception as exc:  # a crashing check is a failed check
            idx = CHECKS.index(fn) + 1
            checks.append(Check(idx, fn.__name__.removeprefix("check_"), False, {}, {},
                                f"{type(exc).__name__}: {exc}"))
    return {
        "version": __version__,
        "seed": seed,
        "quick": quick,
        "inject_fault": inject_fault,
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
