"""Linearised quantum Langevin simulator for entangled photons driving
plasmon-enhanced Raman modes (Stokes, anti-Stokes, phonon)."""

from .errors import (
    ConfigError,
    ConvergenceError,
    G2UndefinedError,
    InstabilityError,
    IntegrationError,
    NonPhysicalCovarianceError,
    PropagatorOverflowError,
    RamanLangevinError,
    SingularJacobianError,
)
from .linear_system import build_diffusion, build_drift, stability
from .moments import MomentMatrix, evolve, initial_moments, propagator, steady_moments
from .observables import correlation_matrix, g2_zero, quadrature_variance, record, symplectic_eta
from .params import CouplingProfile, ModeId, SystemParams, load_config, read_config
from .steady_state import SteadyState, solve

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "G2UndefinedError", "InstabilityError",
    "IntegrationError", "NonPhysicalCovarianceError", "PropagatorOverflowError",
    "RamanLangevinError", "SingularJacobianError",
    "build_diffusion", "build_drift", "stability",
    "MomentMatrix", "evolve", "initial_moments", "propagator", "steady_moments",
    "correlation_matrix", "g2_zero", "quadrature_variance", "record", "symplectic_eta",
    "CouplingProfile", "ModeId", "SystemParams", "load_config", "read_config",
    "SteadyState", "solve",
]
