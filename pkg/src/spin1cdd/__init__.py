"""Decoherence of a spin-1 Zeeman multiplet under Ornstein-Uhlenbeck noise,
free and under continuous dynamical decoupling, with a Monte Carlo oracle."""

__version__ = "0.1.0"

from .analytic import (
    DressedBasis,
    TransferEstimate,
    cdd_transfer,
    cdd_transfer_quadratic,
    cdd_transfer_rate_longtime,
    cdd_transfer_static_limit,
    coherence_fast_limit,
    coherence_free,
    coherence_slow_limit,
    dressed_basis,
)
from .montecarlo import EnsembleResult, TrajectoryConfig, ensemble_reduce
from .noise import (
    OuNoiseModel,
    autocorrelation,
    filtered_phase_variance,
    phase_variance,
    phase_variance_from_spectrum,
    spectrum,
)
from .physconfig import FieldConfig, epsilon_from_field, noise_scale_from_field, omega0_from_field
from .spinops import spin1_operators
