"""Split-operator simulator for a periodically kicked quantum oscillator
with a gain-loss (PT-symmetric) kick potential.

The package evolves a wavefunction on a periodic coordinate grid through
alternating kick and harmonic half-period factors, tracks renormalized
observables (momentum drift, kinetic/potential energy, momentum-space
width), and fits the asymptotic laws those observables follow in the
resonant and non-resonant regimes.
"""

from .analysis import (
    AnalysisError,
    DampedCosineFit,
    DoubleExponentialFit,
    ENVELOPE_EXP_POWER,
    ENVELOPE_PURE,
    FitConvergenceError,
    GaussianFit,
    KickCouplings,
    LinearFit,
    NoPeakError,
    PowerLawFit,
    QuadraticEnergyFit,
    QuadratureError,
    SIGN_MINUS,
    SIGN_PLUS,
    drift_force,
    estimate_frequency,
    fit_damped_cosine,
    fit_double_exponential,
    fit_gaussian,
    fit_linear,
    fit_power_law,
    fit_quadratic_energy,
    kick_hop_amplitudes,
    kick_matrix_elements,
    late_half,
    oscillation_correlation,
)
from .backend import available_backends, make_kernel
from .config import (
    ConfigError,
    ExperimentConfig,
    parse_config,
    preset_config,
    preset_names,
    render_config,
)
from .evolution import (
    EdgeGuardError,
    FloquetParams,
    MemorySink,
    NormOverflowError,
    RunConfig,
    floquet_step,
    harmonic_apply,
    initial_state,
    kick_apply,
    run,
)
from .grid import LatticeGrid, WaveFunction, from_coordinate, make_grid, to_coordinate
from .observables import DensitySnapshot, ObservableRecord, measure, snapshot

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "ConfigError",
    "DampedCosineFit",
    "DensitySnapshot",
    "DoubleExponentialFit",
    "ENVELOPE_EXP_POWER",
    "ENVELOPE_PURE",
    "EdgeGuardError",
    "ExperimentConfig",
    "FitConvergenceError",
    "FloquetParams",
    "GaussianFit",
    "KickCouplings",
    "LatticeGrid",
    "LinearFit",
    "MemorySink",
    "NoPeakError",
    "NormOverflowError",
    "ObservableRecord",
    "PowerLawFit",
    "QuadraticEnergyFit",
    "QuadratureError",
    "RunConfig",
    "SIGN_MINUS",
    "SIGN_PLUS",
    "WaveFunction",
    "available_backends",
    "drift_force",
    "estimate_frequency",
    "fit_damped_cosine",
    "fit_double_exponential",
    "fit_gaussian",
    "fit_linear",
    "fit_power_law",
    "fit_quadratic_energy",
    "floquet_step",
    "from_coordinate",
    "harmonic_apply",
    "initial_state",
    "kick_apply",
    "kick_hop_amplitudes",
    "kick_matrix_elements",
    "late_half",
    "make_grid",
    "make_kernel",
    "measure",
    "oscillation_correlation",
    "parse_config",
    "preset_config",
    "preset_names",
    "render_config",
    "run",
    "snapshot",
    "to_coordinate",
    "__version__",
]
