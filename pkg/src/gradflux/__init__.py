"""Simulation, design and fitting tools for gradiometric fluxonium qubits."""

__version__ = "0.1.0"

from .circuit import (
    EnergyParams,
    PhaseBias,
    SpectralResult,
    batch_levels,
    build_hamiltonian,
    convert_units,
    eigenlevels,
    phase_grid_oracle,
)
from .coherence import DecayRates, DecayTrace, degradation, fit_echo, fit_t1, t2e_combined
from .estimators import DecayFitter, FluxoniumSpectrum, FluxoniumSpectrumFitter, LorentzianPeakFitter
from .fitting import (
    FitConfig,
    FitResult,
    SpectroscopyDataset,
    fit_lorentzian,
    fit_spectrum,
    initial_guess,
    synth_dataset,
)
from .geometry import (
    DesignCoefficients,
    FieldBias,
    GradiometerGeometry,
    LockState,
    design_model,
    design_solve,
    effective_area,
    effective_flux,
    multi_qubit_lock,
    residual_offset,
    total_flux,
    trapped_fluxons,
)
from .spectrum import flux_dispersion, line, line_families, sweet_spot_field

__all__ = [
    "__version__",
    "EnergyParams",
    "PhaseBias",
    "SpectralResult",
    "batch_levels",
    "build_hamiltonian",
    "convert_units",
    "eigenlevels",
    "phase_grid_oracle",
    "FitConfig",
    "FitResult",
    "SpectroscopyDataset",
    "fit_lorentzian",
    "fit_spectrum",
    "initial_guess",
    "synth_dataset",
    "DesignCoefficients",
    "FieldBias",
    "GradiometerGeometry",
    "LockState",
    "design_model",
    "design_solve",
    "effective_area",
    "effective_flux",
    "multi_qubit_lock",
    "residual_offset",
    "total_flux",
    "trapped_fluxons",
    "flux_dispersion",
    "line",
    "line_families",
    "sweet_spot_field",
    "DecayRates",
    "DecayTrace",
    "degradation",
    "fit_echo",
    "fit_t1",
    "t2e_combined",
    "DecayFitter",
    "FluxoniumSpectrum",
    "FluxoniumSpectrumFitter",
    "LorentzianPeakFitter",
]
