"""Rydberg EIT/Autler-Townes spectra and RF field inversion under
band-limited white Gaussian noise."""

__version__ = "0.1.0"

from .analysis import (
    FieldEstimate,
    PeakSet,
    at_splitting,
    csnr_analysis,
    farfield_efield,
    find_peaks,
    infer_efield,
    zero_rf_offset,
)
from .config import ScenarioConfig, builtin_config_path, validate_config
from .lindblad import (
    DecayParameters,
    DensityMatrix,
    DriveParameters,
    build_hamiltonian,
    build_liouvillian,
    steady_state,
    time_evolve,
)
from .noise import (
    FieldGeometry,
    NoiseCouplings,
    NoiseSpectrum,
    ac_shift,
    combine_spectra,
    horn_gain_linear,
    load_noise_psd,
    lumped_rates,
    make_rect_spectrum,
    noise_couplings,
    noise_rate,
    spectral_intensity,
)
from .spectroscopy import (
    CellParameters,
    ForwardModel,
    TransmissionSpectrum,
    probe_scan_spectrum,
    rabi_from_beam,
    transmission_spectrum,
    vapor_density,
)
from .structure import (
    DipoleMatrixElement,
    QuantumDefectTable,
    RydbergState,
    dipole_moment,
    enumerate_perturbers,
    level_energy,
    radial_matrix_element,
    transition_frequency,
)

__all__ = [
    "CellParameters",
    "DecayParameters",
    "DensityMatrix",
    "DipoleMatrixElement",
    "DriveParameters",
    "FieldEstimate",
    "FieldGeometry",
    "ForwardModel",
    "NoiseCouplings",
    "NoiseSpectrum",
    "PeakSet",
    "QuantumDefectTable",
    "RydbergState",
    "ScenarioConfig",
    "TransmissionSpectrum",
    "ac_shift",
    "at_splitting",
    "build_hamiltonian",
    "build_liouvillian",
    "builtin_config_path",
    "combine_spectra",
    "csnr_analysis",
    "dipole_moment",
    "enumerate_perturbers",
    "farfield_efield",
    "find_peaks",
    "horn_gain_linear",
    "infer_efield",
    "level_energy",
    "load_noise_psd",
    "lumped_rates",
    "make_rect_spectrum",
    "noise_couplings",
    "noise_rate",
    "probe_scan_spectrum",
    "rabi_from_beam",
    "radial_matrix_element",
    "spectral_intensity",
    "steady_state",
    "time_evolve",
    "transition_frequency",
    "transmission_spectrum",
    "validate_config",
    "vapor_density",
    "zero_rf_offset",
]
