"""Stochastic-trajectory oracle.

Each trajectory draws its own OU noise path, evolves the spin-1 state
unitarily and records observables on a uniform grid; the ensemble average
is the prediction the closed forms must match.

Trajectory ``i`` always draws from ``noise.stream(master_seed, i)`` and
trajectories are processed in fixed-size chunks, so results are
bit-identical whatever the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import analytic
from .noise import OuNoiseModel, integrated_phase_increments, stream
from .spinops import M_VALUES, OPS, axis_swap_u2, propagator, rotating_frame_u1

DEFAULT_SEED = 20_211_027
CHUNK_SIZE = 256
NORM_TOL = 1e-10
# integration step must resolve the fastest scale this many times over
STEPS_PER_SCALE = 50


class Frame(str, Enum):
    FREE = "free"
    CDD_ROTATED = "cdd_rotated"
    CDD_LAB = "cdd_lab"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrajectoryConfig:
    """Integration grid and ensemble size.

    Observables are recorded every ``record_every`` integration steps.
    """

    dt: float
    t_max: float
    n_trajectories: int
    master_seed: int = DEFAULT_SEED
    frame: Frame = Frame.FREE
    record_every: int = 1
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "frame", Frame(self.frame))
        if not self.dt > 0:
            raise ConfigError("dt must be > 0")
        if not self.t_max >= self.dt:
            raise ConfigError("t_max must be >= dt")
        if self.n_trajectories < 1:
            raise ConfigError("n_trajectories must be >= 1")
        if self.record_every < 1 or self.workers < 1:
            raise ConfigError("record_every and workers must be >= 1")

    @property
    def n_steps(self) -> int:
        return math.ceil(self.t_max / self.dt - 1e-9)

    @property
    def record_steps(self) -> np.ndarray:
        return np.arange(0, self.n_steps + 1, self.record_every)

    @property
    def times(self) -> np.ndarray:
        return self.record_steps * self.dt


def config_for_grid(t_max: float, points: int, dt_max: float, n_trajectories: int,
                    master_seed: int = DEFAULT_SEED, frame: Frame = Frame.FREE,
                    workers: int = 1) -> TrajectoryConfig:
    """Config whose record grid is ``linspace(0, t_max, points)`` with ``dt <= dt_max``."""
    if points < 2:
        raise ConfigError("points must be >= 2")
    spacing = t_max / (points - 1)
    every = max(1, math.ceil(spacing / dt_max - 1e-12))
    return TrajectoryConfig(spacing / every, t_max, n_trajectories, master_seed, frame, every, workers)


@dataclass(frozen=True)
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_trajectories: int

    @property
    def stderr_available(self) -> bool:
        return self.n_trajectories >= 2


def ensemble_reduce(samples, times=None) -> EnsembleResult:
    """Mean and standard error over axis 0 (trajectory index order).

    For complex observables the standard error is that of the complex mean,
    ``sqrt(se_re^2 + se_im^2)``. With a single trajectory it is NaN.
    """
    samples = np.asarray(samples)
    n = samples.shape[0]
    mean = samples.mean(axis=0)
    if n < 2:
        stderr = np.full(mean.shape, np.nan)
    elif np.iscomplexobj(samples):
        var = samples.real.var(axis=0, ddof=1) + samples.imag.var(axis=0, ddof=1)
        stderr = np.sqrt(var / n)
    else:
        stderr = np.sqrt(samples.var(axis=0, ddof=1) / n)
    if times is None:
        times = np.arange(mean.shape[0], dtype=float) if mean.ndim else np.zeros(0)
    return EnsembleResult(np.asarray(times, dtype=float), mean, stderr, n)


def _run_chunks(fn, cfg: TrajectoryConfig) -> np.ndarray:
    chunks = [range(lo, min(lo + CHUNK_SIZE, cfg.n_trajectories))
              for lo in range(0, cfg.n_trajectories, CHUNK_SIZE)]
    if cfg.workers == 1 or len(chunks) == 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(fn, chunks))
    return np.concatenate(parts, axis=0)


def _step_noise(model: OuNoiseModel, cfg: TrajectoryConfig, idx: int, substeps: int) -> np.ndarray:
    """Per-step mean of the noise, aggregated from ``substeps`` finer exact steps."""
    fine = cfg.dt / substeps
    _, incs = integrated_phase_increments(model, fine, cfg.n_steps * substeps,
                                          stream(cfg.master_seed, idx))
    return incs.reshape(cfg.n_steps, substeps).sum(axis=1) / cfg.dt


def _require_frame(cfg: TrajectoryConfig, frame: Frame):
    if cfg.frame is not frame:
        raise ConfigError(f"configuration frame is {cfg.frame.value!r}, expected {frame.value!r}")


def simulate_free(rho0, model: OuNoiseModel, epsilon: float, cfg: TrajectoryConfig) -> EnsembleResult:
    """Ensemble of freely dephasing trajectories; ``mean`` has shape ``(n_times, 3, 3)``.

    The phase ``zeta`` is summed from exact OU integral increments, so the
    result carries no time-step bias.
    """
    _require_frame(cfg, Frame.FREE)
    rho0 = analytic.check_density_matrix(rho0)
    m = np.array(M_VALUES, dtype=float)
    dm = m[:, None] - m[None, :]
    dq = (m**2)[:, None] - (m**2)[None, :]
    times = cfg.times
    steps = cfg.record_steps
    quad = np.exp(-1j * epsilon * times[:, None, None] * dq)

    def run(chunk):
        zeta = np.empty((len(chunk), len(steps)))
        for row, idx in enumerate(chunk):
            _, incs = integrated_phase_increments(model, cfg.dt, cfg.n_steps,
                                                  stream(cfg.master_seed, idx))
            zeta[row] = np.concatenate(([0.0], np.cumsum(incs)))[steps]
        return rho0 * quad * np.exp(-1j * zeta[:, :, None, None] * dm)

    return ensemble_reduce(_run_chunks(run, cfg), times)


def rotated_cdd_dt_bound(model: OuNoiseModel, omega_drive: float, epsilon: float = 0.0) -> float:
    fastest = max(abs(omega_drive), abs(epsilon))
    return min(1.0 / model.alpha, 2.0 * np.pi / fastest) / STEPS_PER_SCALE


def lab_cdd_dt_bound(omega_drive_freq: float) -> float:
    return 2.0 * np.pi / abs(omega_drive_freq) / STEPS_PER_SCALE


def _populations(states: np.ndarray, psi: np.ndarray) -> np.ndarray:
    # |<xi|psi>|^2 for each dressed row xi; psi has shape (n, 3)
    return np.abs(psi @ states.conj().T) ** 2


def _projection_states(omega_drive: float, epsilon: float, scalar_shift: float) -> np.ndarray:
    if omega_drive > 0:
        return analytic.dressed_basis(omega_drive, epsilon, scalar_shift).rotated_states()
    # undriven: the Omega -> 0 limit of the eps = 0 labels, x, y, z <-> m~ = 0, +1, -1
    return np.eye(3, dtype=complex)[[1, 0, 2]]


def _check_norm(psi: np.ndarray):
    drift = np.abs(np.linalg.norm(psi, axis=-1) - 1.0).max()
    if drift > NORM_TOL:
        raise RuntimeError(f"state norm drifted by {drift:.3g}")


def _normalized(psi0) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (3,):
        raise ValueError("psi0 must be a length-3 state vector")
    return psi0 / np.linalg.norm(psi0)


def simulate_cdd_rotated(psi0, model: OuNoiseModel, omega_drive: float, epsilon: float,
                         cfg: TrajectoryConfig, scalar_shift: float = 1.0,
                         noise_substeps: int = 1) -> EnsembleResult:
    """Trajectories under ``Omega fz + eps (fx^2 - c) + dw(t) fx``.

    ``psi0`` is given in the doubly rotated frame. The noise is held at its
    exact step average over each step and the step propagator is exact.
    ``mean[:, i]`` is the population of dressed state ``DRESSED_LABELS[i]``.
    ``noise_substeps > 1`` samples the noise on a finer grid and aggregates
    it, which couples runs at ``dt`` and ``dt / noise_substeps`` path by path.
    """
    _require_frame(cfg, Frame.CDD_ROTATED)
    bound = rotated_cdd_dt_bound(model, omega_drive, epsilon)
    if cfg.dt > bound * (1 + 1e-12):
        raise ConfigError(f"dt={cfg.dt:.6g} exceeds the bound {bound:.6g}")
    psi0 = _normalized(psi0)
    states = analytic.dressed_basis(omega_drive, epsilon, scalar_shift).rotated_states()
    h0 = (omega_drive * OPS.fz + epsilon * (OPS.fx @ OPS.fx - scalar_shift * np.eye(3)))
    record = set(cfg.record_steps.tolist())

    def run(chunk):
        noise = np.stack([_step_noise(model, cfg, idx, noise_substeps) for idx in chunk])
        psi = np.tile(psi0, (len(chunk), 1))
        out = [_populations(states, psi)]
        for k in range(cfg.n_steps):
            u = propagator(h0 + noise[:, k, None, None] * OPS.fx, cfg.dt)
            psi = np.einsum("nij,nj->ni", u, psi)
            if k + 1 in record:
                out.append(_populations(states, psi))
        _check_norm(psi)
        return np.stack(out, axis=1)

    return ensemble_reduce(_run_chunks(run, cfg), cfg.times)


def simulate_cdd_lab(psi0, model: OuNoiseModel, omega0: float, omega_drive_rabi: float,
                     omega_drive_freq: float, epsilon: float, cfg: TrajectoryConfig,
                     scalar_shift: float = 1.0) -> EnsembleResult:
    """Trajectories under the full lab Hamiltonian, no rotating wave approximation.

    The drive cosine is sampled at each step midpoint. With
    ``omega_drive_rabi = 0`` populations are reported on the doubly rotated
    Zeeman states, ordered as the dressed labels at zero drive. States are mapped into
    the doubly rotated frame (``psi_2 = U2^dag U1(t)^dag psi_lab``) before
    projecting on the dressed states, so the output is directly comparable
    with :func:`simulate_cdd_rotated` for the same ``psi0``.
    """
    _require_frame(cfg, Frame.CDD_LAB)
    if not math.isclose(omega_drive_freq, omega0, rel_tol=1e-12):
        raise ConfigError("the drive must be resonant: omega_drive_freq == omega0")
    bound = lab_cdd_dt_bound(omega_drive_freq)
    if cfg.dt > bound * (1 + 1e-12):
        raise ConfigError(f"dt={cfg.dt:.6g} exceeds the bound {bound:.6g}")
    psi0 = _normalized(psi0)
    u2 = axis_swap_u2()
    if omega_drive_rabi < 0:
        raise ValueError("omega_drive_rabi must be >= 0")
    states = _projection_states(omega_drive_rabi, epsilon, scalar_shift)
    h_static = omega0 * OPS.fz + epsilon * (OPS.fz @ OPS.fz - scalar_shift * np.eye(3))
    to_rotated = lambda t: u2.conj().T @ rotating_frame_u1(omega_drive_freq, t).conj().T
    record = set(cfg.record_steps.tolist())

    def run(chunk):
        noise = np.stack([_step_noise(model, cfg, idx, 1) for idx in chunk])
        psi = np.tile(u2 @ psi0, (len(chunk), 1))
        out = [_populations(states, psi @ to_rotated(0.0).T)]
        for k in range(cfg.n_steps):
            t_mid = (k + 0.5) * cfg.dt
            drive = 2.0 * omega_drive_rabi * np.cos(omega_drive_freq * t_mid)
            h = h_static + drive * OPS.fx + noise[:, k, None, None] * OPS.fz
            psi = np.einsum("nij,nj->ni", propagator(h, cfg.dt), psi)
            if k + 1 in record:
                out.append(_populations(states, psi @ to_rotated((k + 1) * cfg.dt).T))
        _check_norm(psi)
        return np.stack(out, axis=1)

    return ensemble_reduce(_run_chunks(run, cfg), cfg.times)
