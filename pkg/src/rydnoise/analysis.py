"""Peak extraction, AT splittings, field inversion, zero-RF offsets, and CSNR
error curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .constants import C_c, E_A0, HBAR, MU0
from .exceptions import ConfigurationError
from .noise import FieldGeometry, NoiseCouplings, horn_gain_linear
from .spectroscopy import ForwardModel, TransmissionSpectrum

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PeakSet:
    """Interpolated transmission peaks, sorted by position (Hz)."""

    positions_hz: np.ndarray
    heights: np.ndarray
    prominences: np.ndarray

    def __len__(self) -> int:
        return self.positions_hz.size

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def most_prominent(self, count: int) -> "PeakSet":
        order = np.argsort(self.prominences)[::-1][:count]
        keep = np.sort(order)
        return PeakSet(self.positions_hz[keep], self.heights[keep], self.prominences[keep])


class FieldEstimate(NamedTuple):
    """Inverted field with the quantities entering |E| = 2 pi (hbar/wp) D df_m."""

    e_field_v_m: float
    splitting_hz: float
    d_factor: float
    dipole_ea0: float


def find_peaks(spectrum: TransmissionSpectrum, prominence: float) -> PeakSet:
    """Local maxima above the prominence threshold, refined by 3-point parabolas.

    Returns an empty PeakSet (explicit suppressed-signal status) when nothing
    clears the threshold.
    """
    if spectrum.transmission.size < 5:
        raise ConfigurationError("need at least 5 samples to find peaks")
    t = spectrum.transmission
    nu = spectrum.detuning_hz
    idx, props = _scipy_find_peaks(t, prominence=prominence)
    positions = []
    heights = []
    for k in idx:
        denom = t[k - 1] - 2.0 * t[k] + t[k + 1]
        shift = 0.0 if denom == 0 else 0.5 * (t[k - 1] - t[k + 1]) / denom
        shift = float(np.clip(shift, -0.5, 0.5))
        positions.append(nu[k] + shift * (nu[min(k + 1, nu.size - 1)] - nu[k]))
        heights.append(t[k] - 0.25 * (t[k - 1] - t[k + 1]) * shift)
    return PeakSet(np.asarray(positions), np.asarray(heights), props.get("prominences", np.empty(0)))


def at_splitting(peaks: PeakSet) -> float | None:
    """Separation (Hz) of the two most prominent peaks; None if fewer than two."""
    if len(peaks) < 2:
        return None
    top = peaks.most_prominent(2)
    return float(abs(top.positions_hz[1] - top.positions_hz[0]))


def infer_efield(splitting_hz: float, dipole_ea0: float, d_factor: float = 1.0) -> float:
    """|E| = 2 pi (hbar / wp) D df_m in V/m."""
    if splitting_hz < 0 or dipole_ea0 <= 0 or d_factor <= 0:
        raise ConfigurationError("need splitting >= 0, dipole > 0, D > 0")
    return TWO_PI * HBAR / (dipole_ea0 * E_A0) * d_factor * splitting_hz


def field_estimate(splitting_hz: float, dipole_ea0: float, d_factor: float = 1.0) -> FieldEstimate:
    return FieldEstimate(
        infer_efield(splitting_hz, dipole_ea0, d_factor), splitting_hz, d_factor, dipole_ea0
    )


def farfield_efield(power_w: float, nu_hz: float, geometry: FieldGeometry) -> float:
    """|E| = (A_sw/x) sqrt(c mu0 / 2 pi) sqrt(P G_L(nu)) in V/m (peak amplitude)."""
    if power_w < 0:
        raise ConfigurationError("power must be >= 0")
    gain = horn_gain_linear(nu_hz, geometry)
    return (
        geometry.enhancement
        / geometry.distance_m
        * math.sqrt(C_c * MU0 / TWO_PI)
        * math.sqrt(power_w * gain)
    )


def peak_height_scale(spectrum: TransmissionSpectrum) -> float:
    """Tallest-peak prominence of a trace, for relative suppression thresholds."""
    peaks = find_peaks(spectrum, prominence=1e-12)
    if peaks.is_empty:
        return 0.0
    return float(peaks.prominences.max())


@dataclass(frozen=True)
class OffsetResult:
    offset_hz: float | None
    suppressed: bool
    peak_prominence: float
    reference_prominence: float


def zero_rf_offset(
    model: ForwardModel,
    scan_grid: np.ndarray,
    couplings: NoiseCouplings,
    relative_prominence: float = 0.05,
    reference: TransmissionSpectrum | None = None,
) -> OffsetResult:
    """Position of the tallest EIT peak at Omega_RF = 0 relative to zero detuning.

    The prominence threshold is ``relative_prominence`` times the no-noise
    peak prominence; below it the signal is declared suppressed.
    """
    if reference is None:
        reference = model.spectrum(scan_grid, omega_rf=0.0)
    ref_prom = peak_height_scale(reference)
    noisy = model.spectrum(scan_grid, omega_rf=0.0, couplings=couplings)
    peaks = find_peaks(noisy, prominence=relative_prominence * ref_prom)
    if peaks.is_empty:
        return OffsetResult(None, True, peak_height_scale(noisy), ref_prom)
    best = int(np.argmax(peaks.prominences))
    return OffsetResult(
        float(peaks.positions_hz[best]), False, float(peaks.prominences[best]), ref_prom
    )


class CsnrPoint(NamedTuple):
    cw_power_w: float
    noise_power_w: float
    csnr: float
    e_reference_v_m: float | None
    e_noisy_v_m: float | None
    percent_difference: float | None


def csnr_analysis(
    model: ForwardModel,
    geometry: FieldGeometry,
    rf_frequency_hz: float,
    rf_dipole_ea0: float,
    cw_powers_w,
    noise_cases,
    scan_halfwidth_hz: float = 250e6,
    scan_points: int = 361,
    relative_prominence: float = 0.002,
    d_factor: float = 1.0,
) -> list[CsnrPoint]:
    """Percent difference of the inferred field vs the no-noise inference.

    ``noise_cases`` is an iterable of (noise_power_w, NoiseCouplings) pairs
    (one per attenuation); CSNR = P_cw / P_noise at the horn input. Suppressed
    or unsplit spectra yield None entries rather than failures.
    """
    results: list[CsnrPoint] = []
    ref_cache: dict[float, tuple[float | None, float]] = {}
    for noise_power, couplings in noise_cases:
        if noise_power <= 0:
            raise ConfigurationError("noise integrated power must be positive")
        for p_cw in cw_powers_w:
            omega_rf = (
                rf_dipole_ea0 * E_A0 * farfield_efield(p_cw, rf_frequency_hz, geometry) / HBAR
            )
            halfwidth = max(scan_halfwidth_hz, 1.1 * omega_rf / TWO_PI)
            grid = TWO_PI * np.linspace(-halfwidth, halfwidth, scan_points)
            if p_cw not in ref_cache:
                ref = model.spectrum(grid, omega_rf=omega_rf)
                prom0 = peak_height_scale(ref)
                split0 = at_splitting(find_peaks(ref, prominence=relative_prominence * prom0))
                e_ref = None if split0 is None else infer_efield(split0, rf_dipole_ea0, d_factor)
                ref_cache[p_cw] = (e_ref, prom0)
            e_ref, prom0 = ref_cache[p_cw]
            noisy = model.spectrum(grid, omega_rf=omega_rf, couplings=couplings)
            split_n = at_splitting(find_peaks(noisy, prominence=relative_prominence * prom0))
            e_noisy = None if split_n is None else infer_efield(split_n, rf_dipole_ea0, d_factor)
            pct = None
            if e_ref and e_noisy:
                pct = 100.0 * (e_noisy - e_ref) / e_ref
            results.append(
                CsnrPoint(p_cw, noise_power, p_cw / noise_power, e_ref, e_noisy, pct)
            )
    return results


__all__ = [
    "CsnrPoint",
    "FieldEstimate",
    "OffsetResult",
    "PeakSet",
    "at_splitting",
    "csnr_analysis",
    "farfield_efield",
    "field_estimate",
    "find_peaks",
    "infer_efield",
    "peak_height_scale",
    "zero_rf_offset",
]
