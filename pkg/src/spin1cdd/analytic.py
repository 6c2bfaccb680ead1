"""Closed-form decoherence predictions.

Coherence decay of the free multiplet under OU noise (general time and both
asymptotic regimes, optionally with quadratic Zeeman phase) and first-order
population transfer between dressed states under continuous driving.

Sign convention: a coherence evolves as ``rho[m, m'] * exp(-i (m - m') zeta)``
for a phase ``zeta`` accumulated along ``fz``, which is what
``exp(-i zeta fz)`` produces. Only magnitudes and phase differences are
physically meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .noise import OuNoiseModel, filtered_phase_variance, phase_variance, spectrum
from .spinops import OPS, axis_swap_u2, m_index

# var / omega_e^2 above this marks the first-order estimate as unreliable.
PERTURBATIVE_LIMIT = 0.1

DRESSED_LABELS = ("x", "y", "z")


class TransferEstimate(NamedTuple):
    """First-order transfer probability and whether first order is trustworthy."""

    probability: np.ndarray
    perturbative: bool


def check_density_matrix(rho, atol: float = 1e-12) -> np.ndarray:
    """Validate a 3x3 density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (3, 3):
        raise ValueError(f"density matrix must be 3x3, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValueError("density matrix trace is not 1")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def quadratic_phase(m: int, mp: int, epsilon: float, t):
    """Phase of the coherence ``rho[m, m']`` from the quadratic Zeeman term."""
    return -(m * m - mp * mp) * epsilon * np.asarray(t, dtype=float)


def coherence_free(rho0, m: int, mp: int, t, model: OuNoiseModel, epsilon: float = 0.0):
    """Noise-averaged density-matrix element ``rho[m, m'](t)`` without driving.

    Parameters
    ----------
    rho0 : array_like, shape (3, 3)
        Initial density matrix in the ``(1, 0, -1)`` basis.
    m, mp : int
        Magnetic quantum numbers of the row and column.
    t : float or array_like
        Times (s), in the frame rotating at the mean Larmor frequency.
    model : OuNoiseModel
    epsilon : float
        Quadratic Zeeman parameter (rad/s).

    Returns
    -------
    complex or ndarray of complex
    """
    rho0 = check_density_matrix(rho0)
    value = rho0[m_index(m), m_index(mp)]
    t = np.asarray(t, dtype=float)
    if m == mp:
        return value * np.ones_like(t, dtype=complex) if t.ndim else complex(value)
    decay = np.exp(-0.5 * (m - mp) ** 2 * phase_variance(model, t))
    out = value * decay * np.exp(1j * quadratic_phase(m, mp, epsilon, t))
    return out if t.ndim else complex(out)


def coherence_slow_limit(m: int, mp: int, t, variance: float):
    """Gaussian decay factor for noise frozen over the observation time."""
    m_index(m), m_index(mp)
    return np.exp(-0.5 * (m - mp) ** 2 * variance * np.asarray(t, dtype=float) ** 2)


def slow_dephasing_time(m: int, mp: int, variance: float) -> float:
    """1/e time of :func:`coherence_slow_limit`; ``inf`` for populations."""
    rate = (m - mp) ** 2 * variance / 2.0
    return math.inf if rate == 0 else rate**-0.5


def coherence_fast_limit(m: int, mp: int, t, spectrum_at_zero: float):
    """Exponential decay factor once ``t`` is long compared to the correlation time."""
    m_index(m), m_index(mp)
    if spectrum_at_zero < 0:
        raise ValueError("spectrum_at_zero must be >= 0")
    return np.exp(-(m - mp) ** 2 * np.pi * spectrum_at_zero * np.asarray(t, dtype=float))


def fast_dephasing_time(m: int, mp: int, spectrum_at_zero: float) -> float:
    rate = (m - mp) ** 2 * np.pi * spectrum_at_zero
    return math.inf if rate == 0 else 1.0 / rate


def fx_element(mt: int, mtp: int) -> float:
    """Matrix element ``(fx)[m~', m~]`` between drive-frame eigenstates."""
    return OPS.fx[m_index(mtp), m_index(mt)].real


def is_perturbative(model: OuNoiseModel, omega_e: float) -> bool:
    return omega_e != 0 and model.variance / omega_e**2 <= PERTURBATIVE_LIMIT


def cdd_transfer(omega_drive: float, mt: int, mtp: int, model: OuNoiseModel, t) -> TransferEstimate:
    """First-order noise-induced transfer ``|m~> -> |m~'>`` under CDD.

    The estimate is returned raw and can exceed 1 when the noise is not
    small compared to the splitting; ``perturbative`` flags that case.
    """
    if mt == mtp:
        raise ValueError("initial and final dressed states must differ")
    element_sq = fx_element(mt, mtp) ** 2
    omega_e = (mtp - mt) * omega_drive
    p = element_sq * filtered_phase_variance(model, omega_e, t)
    return TransferEstimate(p, is_perturbative(model, omega_e))


def cdd_transfer_static_limit(omega_e: float, variance: float, matrix_element_sq: float, t):
    """Transfer for frozen noise, ``|F|^2 (2 var / W^2)(1 - cos W t)``."""
    if omega_e == 0:
        raise ValueError("omega_e must be nonzero")
    t = np.asarray(t, dtype=float)
    # 1 - cos x written as 2 sin^2(x/2) to avoid cancellation near the zeros
    return matrix_element_sq * 4.0 * variance / omega_e**2 * np.sin(0.5 * omega_e * t) ** 2


def cdd_transfer_rate_longtime(omega_e: float, model: OuNoiseModel, matrix_element_sq: float) -> float:
    """Asymptotic growth rate of the transfer probability, ``|F|^2 2 pi S(W)``."""
    return float(matrix_element_sq * 2.0 * np.pi * spectrum(model, omega_e))


@dataclass(frozen=True)
class DressedBasis:
    """Zero-order eigensystem of the driven multiplet with quadratic Zeeman shift.

    ``coeffs[i]`` holds ``(c_{xi,1}, c_{xi,0}, c_{xi,-1})`` for
    ``xi = DRESSED_LABELS[i]``, expanded on Zeeman states in the drive frame,
    where the zero-order Hamiltonian is ``Omega fx + eps (fz^2 - c)`` and the
    noise enters as ``dw fz``. :meth:`rotated_states` gives the same states
    after the axis swap, where the Hamiltonian reads
    ``Omega fz + eps (fx^2 - c)``.
    """

    omega_drive: float
    epsilon: float
    scalar_shift: float
    omegas: np.ndarray
    coeffs: np.ndarray

    @property
    def omega_x(self) -> float:
        return float(self.omegas[0])

    @property
    def omega_y(self) -> float:
        return float(self.omegas[1])

    @property
    def omega_z(self) -> float:
        return float(self.omegas[2])

    def index(self, xi: str) -> int:
        try:
            return DRESSED_LABELS.index(xi)
        except ValueError:
            raise ValueError(f"dressed label must be one of {DRESSED_LABELS}, got {xi!r}") from None

    def drive_frame_hamiltonian(self) -> np.ndarray:
        return (self.omega_drive * OPS.fx
                + self.epsilon * (OPS.fz @ OPS.fz - self.scalar_shift * np.eye(3)))

    def rotated_hamiltonian(self) -> np.ndarray:
        return (self.omega_drive * OPS.fz
                + self.epsilon * (OPS.fx @ OPS.fx - self.scalar_shift * np.eye(3)))

    def rotated_states(self) -> np.ndarray:
        """Rows are the dressed states in the doubly rotated frame."""
        u2 = axis_swap_u2()
        return (u2.conj().T @ self.coeffs.T).T

    def residuals(self) -> np.ndarray:
        """Eigen-equation residual norm per state, in both frames (max taken)."""
        out = np.empty(3)
        h1, h2 = self.drive_frame_hamiltonian(), self.rotated_hamiltonian()
        rot = self.rotated_states()
        for i in range(3):
            r1 = np.linalg.norm(h1 @ self.coeffs[i] - self.omegas[i] * self.coeffs[i])
            r2 = np.linalg.norm(h2 @ rot[i] - self.omegas[i] * rot[i])
            out[i] = max(r1, r2)
        return out

    def coupling(self, xi: str, xip: str) -> float:
        """Noise matrix element ``<xi'| fz |xi>`` in the drive frame.

        Equal in magnitude to ``<xi'| fx |xi>`` between :meth:`rotated_states`.
        """
        a, b = self.coeffs[self.index(xip)], self.coeffs[self.index(xi)]
        return float(a @ OPS.fz.real @ b)

    def transition_frequency(self, xi: str, xip: str) -> float:
        return float(self.omegas[self.index(xip)] - self.omegas[self.index(xi)])


def _closed_form_coeffs(w: float, omega_drive: float, epsilon: float) -> np.ndarray:
    od2 = omega_drive**2
    c1 = (2.0 + 4.0 * w**2 / od2**2 * (w + epsilon) ** 2 - 4.0 * w / od2 * (w / 2.0 + epsilon)) ** -0.5
    c0 = math.sqrt(2.0) * w / omega_drive * c1
    cm1 = -(1.0 - 2.0 * w / od2 * (w + epsilon)) * c1
    return np.array([c1, c0, cm1])


def dressed_basis(omega_drive: float, epsilon: float = 0.0, scalar_shift: float = 1.0) -> DressedBasis:
    """Closed-form dressed eigenfrequencies and eigenvector coefficients.

    Eigenfrequencies are ``0`` and ``(-eps +/- sqrt(eps^2 + 4 Omega^2)) / 2``
    for the default scalar shift; any other shift ``c`` moves all three by
    ``(1 - c) eps``.
    """
    if not omega_drive > 0:
        raise ValueError("omega_drive must be > 0")
    root = math.sqrt(epsilon**2 + 4.0 * omega_drive**2)
    base = np.array([0.0, (-epsilon + root) / 2.0, -(epsilon + root) / 2.0])
    coeffs = np.array([_closed_form_coeffs(w, omega_drive, epsilon) for w in base])
    omegas = base + (1.0 - scalar_shift) * epsilon
    return DressedBasis(omega_drive, epsilon, scalar_shift, omegas, coeffs)


def numeric_dressed_basis(omega_drive: float, epsilon: float = 0.0, scalar_shift: float = 1.0) -> DressedBasis:
    """Same eigensystem by direct diagonalization, ordered and signed to match."""
    ref = dressed_basis(omega_drive, epsilon, scalar_shift)
    w, v = np.linalg.eigh(ref.drive_frame_hamiltonian())
    v = v.real
    order = [int(np.argmin(np.abs(w - target))) for target in ref.omegas]
    vecs = v[:, order].T.copy()
    for row in vecs:
        if row[0] < 0:
            row *= -1.0
    return DressedBasis(omega_drive, epsilon, scalar_shift, w[order], vecs)


def cdd_transfer_quadratic(basis: DressedBasis, xi: str, xip: str, model: OuNoiseModel, t) -> TransferEstimate:
    """First-order transfer ``|xi> -> |xi'>`` between quadratic-Zeeman dressed states."""
    if xi == xip:
        raise ValueError("initial and final dressed states must differ")
    element_sq = basis.coupling(xi, xip) ** 2
    omega_e = basis.transition_frequency(xi, xip)
    p = element_sq * filtered_phase_variance(model, omega_e, t)
    return TransferEstimate(p, is_perturbative(model, omega_e))
