"""Laboratory field parameters mapped onto model angular frequencies.

Every function returns an angular frequency in rad/s. Physical constants
are carried on :class:`FieldConfig` so the same code serves any alkali
F = 1 manifold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FieldConfig:
    """Static bias field, its RMS fluctuation and the constants that convert them.

    Parameters
    ----------
    B0 : float
        Mean magnetic field (T).
    deltaB_rms : float
        RMS of the field fluctuation (T).
    gF, gS, gI : float
        Dimensionless g-factors.
    muB, muN : float
        Bohr and nuclear magnetons (J/T).
    hbar : float
        Reduced Planck constant (J s).
    deltaW_hf : float
        Hyperfine splitting between the F = 2 and F = 1 manifolds (J).
    """

    B0: float
    deltaB_rms: float
    gF: float
    gS: float
    gI: float
    muB: float
    muN: float
    hbar: float
    deltaW_hf: float

    def __post_init__(self):
        for name in ("B0", "deltaB_rms", "gF", "gS", "gI", "muB", "muN", "hbar", "deltaW_hf"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.B0 < 0:
            raise ValueError("B0 must be >= 0")
        if self.deltaB_rms < 0:
            raise ValueError("deltaB_rms must be >= 0")
        if self.deltaW_hf <= 0:
            raise ValueError("deltaW_hf must be > 0")
        if self.hbar <= 0:
            raise ValueError("hbar must be > 0")

    @property
    def _gyromagnetic(self) -> float:
        # rad/s per tesla
        return self.gF * (self.gS * abs(self.muB) - self.gI * self.muN) / self.hbar


def omega0_from_field(cfg: FieldConfig) -> float:
    """Mean Larmor frequency of the multiplet (rad/s); signed like gF."""
    return cfg._gyromagnetic * cfg.B0


def noise_scale_from_field(cfg: FieldConfig) -> float:
    """RMS of the frequency fluctuation (rad/s).

    Squaring the result gives the variance of an OU frequency noise model.
    """
    return cfg._gyromagnetic * cfg.deltaB_rms


def epsilon_from_field(cfg: FieldConfig) -> float:
    """Quadratic Zeeman parameter (rad/s) from the Breit-Rabi expansion.

    Evaluated at the mean field only; fluctuations of this term are second
    order in the field noise and are neglected.
    """
    moment = cfg.gS * cfg.muB - cfg.gI * cfg.muN
    return moment**2 * cfg.B0**2 / (4.0 * cfg.deltaW_hf * cfg.hbar)
