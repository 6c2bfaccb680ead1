"""Spin-1 operators, frame transformations and Hamiltonian constructors.

Basis order is fixed as ``(|1,1>, |1,0>, |1,-1>)``. Operators are
dimensionless (F / hbar) and Hamiltonians are H / hbar in rad/s, so a
propagator over a time ``t`` is ``exp(-1j * H * t)``.

Frame conventions
-----------------
The drive frame ``U1(t) = exp(-i w_d t fz)`` maps lab states as
``psi_lab = U1 psi_1``; under the rotating wave approximation the
Hamiltonian becomes ``delta fz + Omega fx + eps (fz^2 - c)``. The axis
swap ``U2 = exp(-i pi/2 fy)`` maps ``psi_1 = U2 psi_2`` and gives
``U2^dag H_1 U2 = Omega fz - delta fx + eps (fx^2 - c)``. The sign of the
noise term is immaterial for zero-mean Gaussian noise, and
:func:`cdd_rotated_hamiltonian` uses ``+delta fx``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)
M_VALUES = (1, 0, -1)


@dataclass(frozen=True)
class SpinOperators:
    fx: np.ndarray
    fy: np.ndarray
    fz: np.ndarray

    @property
    def identity(self) -> np.ndarray:
        return np.eye(3, dtype=complex)


def spin1_operators() -> SpinOperators:
    """Return the standard spin-1 matrices."""
    s = 1.0 / SQRT2
    fx = np.array([[0, s, 0], [s, 0, s], [0, s, 0]], dtype=complex)
    fy = np.array([[0, -1j * s, 0], [1j * s, 0, -1j * s], [0, 1j * s, 0]], dtype=complex)
    fz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    for m in (fx, fy, fz):
        m.setflags(write=False)
    return SpinOperators(fx, fy, fz)


OPS = spin1_operators()


def m_index(m: int) -> int:
    """Row index of the magnetic quantum number ``m`` in the fixed basis."""
    if m not in M_VALUES:
        raise ValueError(f"magnetic quantum number must be one of {M_VALUES}, got {m!r}")
    return 1 - m


def hermitize(h: np.ndarray) -> np.ndarray:
    return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))


def propagator(h: np.ndarray, t: float | np.ndarray) -> np.ndarray:
    """``exp(-1j * h * t)`` for Hermitian ``h`` by eigendecomposition.

    ``h`` may be a stack of matrices with shape ``(..., 3, 3)``; ``t`` is a
    scalar or broadcasts against the leading axes.
    """
    w, v = np.linalg.eigh(h)
    phase = np.exp(-1j * w * np.asarray(t)[..., None])
    return (v * phase[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def rotating_frame_u1(omega_d: float, t: float) -> np.ndarray:
    """Drive-frame unitary ``exp(-i omega_d t fz)`` (diagonal)."""
    return np.diag(np.exp(-1j * omega_d * t * np.array(M_VALUES, dtype=float)))


def axis_swap_u2() -> np.ndarray:
    """Unitary ``exp(-i (pi/2) fy)`` exchanging the z and x axes."""
    return propagator(OPS.fy, np.pi / 2)


def _quadratic(op_sq: np.ndarray, epsilon: float, scalar_shift: float) -> np.ndarray:
    return epsilon * (op_sq - scalar_shift * np.eye(3))


def free_hamiltonian(omega0: float, delta_omega: float, epsilon: float = 0.0,
                     scalar_shift: float = 1.0) -> np.ndarray:
    """Zeeman multiplet ``(w0 + dw) fz + eps (fz^2 - c)``."""
    h = (omega0 + delta_omega) * OPS.fz + _quadratic(OPS.fz @ OPS.fz, epsilon, scalar_shift)
    return hermitize(h)


def cdd_rotated_hamiltonian(omega_drive: float, delta_omega: float, epsilon: float = 0.0,
                            scalar_shift: float = 1.0) -> np.ndarray:
    """Doubly rotated CDD Hamiltonian ``Omega fz + eps (fx^2 - c) + dw fx``."""
    h = (omega_drive * OPS.fz
         + _quadratic(OPS.fx @ OPS.fx, epsilon, scalar_shift)
         + delta_omega * OPS.fx)
    return hermitize(h)


def cdd_lab_hamiltonian(omega0: float, omega_drive_rabi: float, omega_drive_freq: float,
                        delta_omega: float, epsilon: float, t: float,
                        scalar_shift: float = 1.0) -> np.ndarray:
    """Lab-frame Hamiltonian with the transverse drive ``2 Omega cos(w_d t) fx``."""
    drive = 2.0 * omega_drive_rabi * np.cos(omega_drive_freq * t)
    return hermitize(free_hamiltonian(omega0, delta_omega, epsilon, scalar_shift) + drive * OPS.fx)
