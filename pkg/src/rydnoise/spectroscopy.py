"""Doppler-averaged probe transmission spectra.

For each scan detuning the steady-state probe coherence rho_21 is computed
per velocity class, averaged over the 1-d Maxwell distribution, converted to
the weak-probe susceptibility chi = -2 N wp^2 rho_21 / (eps0 hbar Omega_p)
(sign fixed so Im chi >= 0 is absorption in this rotating-frame convention),
then to Beer absorption alpha = (2 pi / lambda_p) Im chi and transmission
exp(-alpha L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import C_c, EPS0, E_A0, HBAR, KB, MASS_RB85
from .exceptions import ConfigurationError, VelocityConvergenceError
from .kernels import steady_coherence_grid
from .lindblad import (
    COORD_INDEX,
    DecayParameters,
    DriveParameters,
    build_hamiltonian,
    build_liouvillian,
    pin_zero_rows,
    reduce_liouvillian,
    scan_coefficients,
    with_trace_row,
)
from .noise import NoiseCouplings

TWO_PI = 2.0 * math.pi
_RHO21 = COORD_INDEX[(1, 0)]


@dataclass(frozen=True)
class CellParameters:
    """Vapor cell, beam, and wavelength parameters."""

    length_m: float = 0.075
    temperature_k: float = 294.0
    isotope_fraction: float = 0.7217
    lambda_probe_m: float = 780.241e-9
    lambda_coupling_m: float = 479.9285e-9
    probe_power_w: float = 4.1e-6
    probe_fwhm_m: float = 270e-6
    coupling_power_w: float = 43.3e-3
    coupling_fwhm_m: float = 353e-6

    def __post_init__(self):
        positive = (
            self.length_m, self.temperature_k, self.lambda_probe_m, self.lambda_coupling_m,
            self.probe_power_w, self.probe_fwhm_m, self.coupling_power_w, self.coupling_fwhm_m,
        )
        if min(positive) <= 0:
            raise ConfigurationError("cell lengths, temperature, wavelengths, powers, FWHMs must be > 0")
        if not 0 < self.isotope_fraction <= 1:
            raise ConfigurationError("isotope fraction must be in (0, 1]")


@dataclass(frozen=True)
class TransmissionSpectrum:
    """Probe transmission vs scanned detuning (rad/s), with scan provenance."""

    detuning_rad_s: np.ndarray
    transmission: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.detuning_rad_s, dtype=float)
        t = np.asarray(self.transmission, dtype=float)
        if np.any(np.diff(d) <= 0):
            raise ConfigurationError("detuning grid must be strictly increasing")
        if t.min() <= 0 or t.max() > 1.0 + 1e-12:
            raise ConfigurationError("transmission must lie in (0, 1]")
        d = d.copy(); t = t.copy()
        d.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "detuning_rad_s", d)
        object.__setattr__(self, "transmission", t)

    @property
    def detuning_hz(self) -> np.ndarray:
        return self.detuning_rad_s / TWO_PI

    def write_csv(self, path) -> None:
        lines = [f"# {k}={v}" for k, v in sorted(self.metadata.items())]
        lines.append("detuning_Hz,transmission")
        for d, t in zip(self.detuning_hz, self.transmission):
            lines.append(f"{float(d)!r},{float(t)!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def rabi_from_beam(power_w: float, fwhm_m: float, dipole_ea0: float) -> float:
    """Peak Rabi frequency (rad/s) of a Gaussian beam: I = 2P/(pi w^2), w = fwhm/sqrt(2 ln 2)."""
    if power_w < 0 or fwhm_m <= 0 or dipole_ea0 <= 0:
        raise ConfigurationError("need power >= 0, fwhm > 0, dipole > 0")
    waist = fwhm_m / math.sqrt(2.0 * math.log(2.0))
    intensity = 2.0 * power_w / (math.pi * waist**2)
    e_field = math.sqrt(2.0 * intensity / (C_c * EPS0))
    return dipole_ea0 * E_A0 * e_field / HBAR


def vapor_density(temperature_k: float, isotope_fraction: float = 1.0) -> float:
    """Rb number density (1/m^3) from the Steck vapor-pressure curves.

    log10 P[Torr] = 2.881 + 4.312 - 4040/T (solid, T < 312.46 K)
                  = 2.881 + 4.857 - 4215/T (liquid above the melting point);
    converted with the ideal-gas law and scaled by the isotope fraction.
    """
    if not 250.0 < temperature_k < 450.0:
        raise ConfigurationError("vapor-pressure formula valid for 250 K < T < 450 K")
    if temperature_k < 312.46:
        log10_p = 2.881 + 4.312 - 4040.0 / temperature_k
    else:
        log10_p = 2.881 + 4.857 - 4215.0 / temperature_k
    pressure_pa = 10.0**log10_p * 133.322368
    return isotope_fraction * pressure_pa / (KB * temperature_k)


def maxwell_velocity_grid(
    temperature_k: float,
    mass_kg: float,
    n_classes: int,
    span: float = 4.0,
    fine_window_m_s: float | None = 100.0,
    fine_fraction: float = 0.875,
):
    """Velocity grid over +-span most-probable speeds with 1-d Maxwell weights.

    The probe absorption envelope (width Gamma_2/k_p, a few m/s) and the EIT
    notches (width gamma_EIT/(k_c - k_p), below 1 m/s) are orders of magnitude
    narrower than the Maxwell distribution, so a uniform grid would need
    ~10^4 classes. Instead ``fine_fraction`` of the classes sample a uniform
    core +-fine_window_m_s where all coherent features live, and the rest
    cover the wings, where the integrand is a smooth far Lorentzian tail.
    Weights are Maxwell pdf values times non-uniform trapezoid widths.
    ``fine_window_m_s=None`` gives a plain uniform grid.
    """
    if n_classes < 1:
        raise ConfigurationError("need at least one velocity class")
    if n_classes == 1:
        return np.zeros(1), np.ones(1)
    v_p = math.sqrt(2.0 * KB * temperature_k / mass_kg)
    v_max = span * v_p
    if fine_window_m_s is None or fine_window_m_s >= v_max:
        v = np.linspace(-v_max, v_max, n_classes)
        widths = _trapezoid_widths(v)
    else:
        # wings grow geometrically: a notch at v contributes ~ (Gamma_2/k_p v)^2,
        # so the resolvable step can grow in proportion without losing accuracy
        n_fine = max(5, int(round(fine_fraction * n_classes)))
        n_fine += (n_fine + 1) % 2  # composite Simpson needs an odd count
        fine = np.linspace(-fine_window_m_s, fine_window_m_s, n_fine)
        step = fine[1] - fine[0]
        wing = [fine_window_m_s]
        while wing[-1] + step < v_max:
            wing.append(wing[-1] + step)
            step *= 1.015
        wing.append(v_max)
        half = np.asarray(wing[1:])
        v = np.concatenate((-half[::-1], fine, half))
        # Simpson weights on the uniform core (the narrow notch structure needs
        # the h^4 order), trapezoid on the graded wings
        widths = np.zeros_like(v)
        nw = half.size
        core = slice(nw, nw + n_fine)
        h_core = fine[1] - fine[0]
        simpson = np.ones(n_fine)
        simpson[1:-1:2] = 4.0
        simpson[2:-1:2] = 2.0
        widths[core] = simpson * h_core / 3.0
        for sl in (slice(0, nw + 1), slice(nw + n_fine - 1, v.size)):
            widths[sl] += _trapezoid_widths(v[sl])
    w = np.exp(-((v / v_p) ** 2)) / (v_p * math.sqrt(math.pi))
    return v, w * widths


def _trapezoid_widths(x: np.ndarray) -> np.ndarray:
    gaps = np.diff(x)
    widths = np.empty_like(x)
    widths[0] = gaps[0] / 2.0
    widths[-1] = gaps[-1] / 2.0
    widths[1:-1] = (gaps[:-1] + gaps[1:]) / 2.0
    return widths


@dataclass(frozen=True)
class ForwardModel:
    """Bundle of everything needed to predict a transmission spectrum."""

    drives: DriveParameters
    decays: DecayParameters
    cell: CellParameters
    probe_dipole_ea0: float
    n_velocity: int = 6401
    velocity_span: float = 4.0
    fine_window_m_s: float | None = 100.0
    fine_fraction: float = 0.875
    atom_mass_kg: float = MASS_RB85
    density_m3: float | None = None
    use_numba: bool | None = None

    def __post_init__(self):
        if self.drives.omega_p <= 0:
            raise ConfigurationError("probe Rabi frequency must be positive")

    @property
    def number_density(self) -> float:
        if self.density_m3 is not None:
            return self.density_m3
        return vapor_density(self.cell.temperature_k, self.cell.isotope_fraction)

    def _averaged_rho21(
        self,
        scan_grid: np.ndarray,
        scan: str,
        couplings: NoiseCouplings,
        omega_rf: float | None,
        n_velocity: int | None = None,
        velocity_span: float | None = None,
    ) -> np.ndarray:
        drives = self.drives if omega_rf is None else replace(self.drives, omega_rf=omega_rf)
        decays = replace(self.decays, couplings=couplings)
        wavelengths = (self.cell.lambda_probe_m, self.cell.lambda_coupling_m)
        h0 = build_hamiltonian(
            drives, shifts_hz=(couplings.shift_3_hz, couplings.shift_4_hz),
            velocity=0.0, wavelengths=wavelengths,
        )
        l0 = with_trace_row(pin_zero_rows(reduce_liouvillian(build_liouvillian(h0, decays))))
        cs, cv = scan_coefficients(scan, wavelengths)
        v, w = maxwell_velocity_grid(
            self.cell.temperature_k,
            self.atom_mass_kg,
            self.n_velocity if n_velocity is None else n_velocity,
            self.velocity_span if velocity_span is None else velocity_span,
            self.fine_window_m_s,
            self.fine_fraction,
        )
        return steady_coherence_grid(
            l0, cs, cv, np.asarray(scan_grid, dtype=float), v, w, _RHO21, self.use_numba
        )

    def spectrum(
        self,
        scan_grid: np.ndarray,
        scan: str = "coupling",
        couplings: NoiseCouplings | None = None,
        omega_rf: float | None = None,
        metadata: dict | None = None,
        n_velocity: int | None = None,
        velocity_span: float | None = None,
    ) -> TransmissionSpectrum:
        """Transmission over the scan grid (rad/s added to the base detuning)."""
        couplings = couplings or NoiseCouplings()
        rho21 = self._averaged_rho21(scan_grid, scan, couplings, omega_rf, n_velocity, velocity_span)
        drives = self.drives if omega_rf is None else replace(self.drives, omega_rf=omega_rf)
        chi = (
            -2.0
            * self.number_density
            * (self.probe_dipole_ea0 * E_A0) ** 2
            / (EPS0 * HBAR * drives.omega_p)
            * rho21
        )
        alpha = (TWO_PI / self.cell.lambda_probe_m) * np.maximum(chi.imag, 0.0)
        transmission = np.exp(-alpha * self.cell.length_m)
        meta = {
            "scan": scan,
            "n_velocity": n_velocity if n_velocity is not None else self.n_velocity,
            "velocity_span": velocity_span if velocity_span is not None else self.velocity_span,
            "omega_p_rad_s": drives.omega_p,
            "omega_c_rad_s": drives.omega_c,
            "omega_rf_rad_s": drives.omega_rf,
            "r_34_per_s": couplings.r_34,
            "r_d3_per_s": couplings.r_d3,
            "r_e4_per_s": couplings.r_e4,
            "shift_3_Hz": couplings.shift_3_hz,
            "shift_4_Hz": couplings.shift_4_hz,
            "density_m3": self.number_density,
        }
        meta.update(metadata or {})
        return TransmissionSpectrum(np.asarray(scan_grid, float), transmission, meta)

    def check_velocity_convergence(
        self,
        scan_grid: np.ndarray,
        scan: str = "coupling",
        couplings: NoiseCouplings | None = None,
        tolerance: float = 1e-4,
    ) -> float:
        """Max |T| change when doubling the class count; raises if above tolerance."""
        base = self.spectrum(scan_grid, scan, couplings)
        fine = self.spectrum(scan_grid, scan, couplings, n_velocity=2 * self.n_velocity)
        achieved = float(np.abs(base.transmission - fine.transmission).max())
        if achieved > tolerance:
            raise VelocityConvergenceError(
                f"velocity grid not converged: {achieved:.3e} > {tolerance:.3e}", achieved
            )
        return achieved


def transmission_spectrum(model: ForwardModel, scan_grid, **kwargs) -> TransmissionSpectrum:
    """Coupling-laser scan (the measurement mode of the experiment)."""
    return model.spectrum(scan_grid, scan="coupling", **kwargs)


def probe_scan_spectrum(model: ForwardModel, scan_grid, **kwargs) -> TransmissionSpectrum:
    """Probe-laser scan; splittings pick up the Doppler-mismatch factor."""
    return model.spectrum(scan_grid, scan="probe", **kwargs)


__all__ = [
    "CellParameters",
    "ForwardModel",
    "TransmissionSpectrum",
    "maxwell_velocity_grid",
    "probe_scan_spectrum",
    "rabi_from_beam",
    "transmission_spectrum",
    "vapor_density",
]
