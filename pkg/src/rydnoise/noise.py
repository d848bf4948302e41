"""Band-limited noise: power spectral densities, propagation to the atoms,
noise-induced transition rates, and AC level shifts with principal-value
pole handling.

Units convention. ``spectral_intensity`` evaluates the free-space propagation
product I_nu = (A_sw^2/x^2)(c mu0 / 2 pi) G_L(nu) dP/dnu. Because the
(c mu0 / 2 pi) factor is the one that maps power*gain to the *squared peak
field amplitude* (that is how the corresponding CW expression yields |E|),
this quantity is numerically d(E0^2)/dnu in (V/m)^2/Hz. The rate and shift
formulas are golden-rule / second-order results that take a true intensity in
W/(m^2 Hz), so `noise_rate` and `ac_shift` divide by 2*c*mu0 internally;
equivalently R = (wp E0 / hbar)^2 / 4 per unit bandwidth, which reduces to
the textbook light shift hbar Omega^2 / (4 delta) in the monochromatic limit.
Table 1 of the source experiment is reproduced only with this normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import E_A0, HBAR, Z0
from .exceptions import ConfigurationError, SelectionRuleError
from .structure import (
    Perturber,
    QuantumDefectTable,
    RydbergState,
    transition_frequency,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class NoiseSpectrum:
    """Sampled noise power spectral density dP/dnu at the horn input.

    Piecewise linear between grid points, exactly zero outside the grid.
    """

    frequency_hz: np.ndarray
    psd_w_per_hz: np.ndarray
    integrated_power_w: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        f = np.asarray(self.frequency_hz, dtype=float)
        p = np.asarray(self.psd_w_per_hz, dtype=float)
        if f.ndim != 1 or f.size < 2 or p.shape != f.shape:
            raise ConfigurationError("spectrum needs matching 1-d grids with >= 2 samples")
        if np.any(np.diff(f) <= 0):
            raise ConfigurationError("frequency grid must be strictly increasing")
        if np.any(p < 0):
            raise ConfigurationError("psd values must be >= 0")
        f = f.copy()
        p = p.copy()
        f.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "frequency_hz", f)
        object.__setattr__(self, "psd_w_per_hz", p)
        power = float(np.trapezoid(p, f))
        if self.integrated_power_w is None:
            object.__setattr__(self, "integrated_power_w", power)
        elif not math.isclose(power, self.integrated_power_w, rel_tol=1e-12, abs_tol=1e-30):
            raise ConfigurationError("integrated_power_w inconsistent with trapezoid integral")

    @property
    def support(self) -> tuple[float, float]:
        return float(self.frequency_hz[0]), float(self.frequency_hz[-1])

    def value_at(self, nu) -> np.ndarray:
        return np.interp(nu, self.frequency_hz, self.psd_w_per_hz, left=0.0, right=0.0)

    def scaled(self, factor: float) -> "NoiseSpectrum":
        if factor < 0:
            raise ConfigurationError("scale factor must be >= 0")
        return NoiseSpectrum(self.frequency_hz, self.psd_w_per_hz * factor)

    def rescaled_to_power(self, power_w: float) -> "NoiseSpectrum":
        if self.integrated_power_w <= 0:
            raise ConfigurationError("cannot rescale a zero-power spectrum")
        return self.scaled(power_w / self.integrated_power_w)

    def attenuated(self, attenuation_db: float) -> "NoiseSpectrum":
        """Apply an attenuator: power scales by 10^(dB/10), shape preserved."""
        return self.scaled(10.0 ** (attenuation_db / 10.0))


def make_rect_spectrum(center_hz: float, bandwidth_hz: float, power_w: float) -> NoiseSpectrum:
    """Flat-top spectrum: psd = power/bandwidth on [center - B/2, center + B/2]."""
    if bandwidth_hz <= 0:
        raise ConfigurationError("bandwidth must be positive")
    if power_w < 0:
        raise ConfigurationError("power must be >= 0")
    lo = center_hz - bandwidth_hz / 2.0
    hi = center_hz + bandwidth_hz / 2.0
    if lo <= 0:
        raise ConfigurationError("band extends to non-positive frequency")
    level = power_w / bandwidth_hz
    return NoiseSpectrum(np.array([lo, hi]), np.array([level, level]))


def combine_spectra(spectra) -> NoiseSpectrum:
    """Union of disjoint bands on one grid (1-Hz walls at interior band edges)."""
    spectra = sorted(spectra, key=lambda s: s.support[0])
    freq: list[float] = []
    psd: list[float] = []
    for k, s in enumerate(spectra):
        f = s.frequency_hz.tolist()
        p = s.psd_w_per_hz.tolist()
        if k > 0:
            gap = s.support[0] - freq[-1]
            if gap < 0:
                raise ConfigurationError("combined bands must not overlap")
            if gap == 0.0:
                if p[0] == psd[-1]:
                    f, p = f[1:], p[1:]  # seamless junction
                else:
                    f = [f[0] + 1.0] + f[1:]  # 1-Hz step at the level jump
            elif gap > 2.0:
                freq.extend([freq[-1] + 1.0, s.support[0] - 1.0])
                psd.extend([0.0, 0.0])
        freq.extend(f)
        psd.extend(p)
    return NoiseSpectrum(np.array(freq), np.array(psd))


def load_noise_psd(path, total_power_w: float | None = None) -> NoiseSpectrum:
    """Load a two-column psd CSV.

    First non-comment content must be a header line
    ``# units: Hz,W_per_Hz`` or ``# units: GHz,dBm_per_Hz``; then comma-separated
    (frequency, psd) rows. Comments start with '#'. If ``total_power_w`` is
    given the spectrum is rescaled to that integral.
    """
    path = Path(path)
    units = None
    rows: list[tuple[float, float]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.lower().startswith("units:"):
                units = body.split(":", 1)[1].strip()
            continue
        if units is None:
            raise ConfigurationError(
                f"{path}:{lineno}: psd data before the mandatory '# units:' header"
            )
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigurationError(f"{path}:{lineno}: expected two comma-separated columns")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigurationError(f"{path}:{lineno}: non-numeric value") from None
    if units is None:
        raise ConfigurationError(f"{path}: missing '# units:' header")
    if len(rows) < 2:
        raise ConfigurationError(f"{path}: need at least 2 samples")

    freq = np.array([r[0] for r in rows])
    psd = np.array([r[1] for r in rows])
    key = units.replace(" ", "")
    if key == "Hz,W_per_Hz":
        pass
    elif key == "GHz,dBm_per_Hz":
        freq = freq * 1e9
        psd = 10.0 ** (psd / 10.0) * 1e-3
    else:
        raise ConfigurationError(f"{path}: unsupported units tag {units!r}")
    for lineno_like, (a, b) in enumerate(zip(freq[:-1], freq[1:]), start=1):
        if b <= a:
            raise ConfigurationError(f"{path}: sample {lineno_like + 1}: grid not increasing")
    if np.any(psd < 0):
        bad = int(np.nonzero(psd < 0)[0][0]) + 1
        raise ConfigurationError(f"{path}: sample {bad}: negative psd")
    spec = NoiseSpectrum(freq, psd)
    if total_power_w is not None:
        spec = spec.rescaled_to_power(total_power_w)
    return spec


@dataclass(frozen=True)
class FieldGeometry:
    """Horn-to-atoms geometry and the log-linear antenna gain model."""

    distance_m: float
    enhancement: float = 1.0
    gain_reference_db: float = 15.0
    gain_slope_db_per_ghz: float = 3.0 / 8.5
    gain_reference_ghz: float = 18.0

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ConfigurationError("distance must be positive")
        if self.enhancement <= 0:
            raise ConfigurationError("enhancement factor must be positive")


def horn_gain_db(nu_hz: float, geometry: FieldGeometry) -> float:
    nu_ghz = np.asarray(nu_hz, dtype=float) / 1e9
    out = geometry.gain_reference_db + geometry.gain_slope_db_per_ghz * (
        nu_ghz - geometry.gain_reference_ghz
    )
    return out if out.ndim else float(out)


def horn_gain_linear(nu_hz: float, geometry: FieldGeometry):
    if np.any(np.asarray(nu_hz) <= 0):
        raise ConfigurationError("gain model needs positive frequency")
    out = 10.0 ** (np.asarray(horn_gain_db(nu_hz, geometry)) / 10.0)
    return out if out.ndim else float(out)


class SpectralIntensity:
    """Noise spectral intensity at the atoms as a piecewise-linear function.

    Callable on frequencies in Hz; zero outside the noise band. Values carry
    the squared-field-amplitude normalization discussed in the module
    docstring. The gain factor varies smoothly, so each psd segment is
    subdivided (``refine`` points) before freezing the piecewise-linear
    representation used by the analytic integrators.
    """

    def __init__(self, spectrum: NoiseSpectrum, geometry: FieldGeometry, refine: int = 16):
        grid = spectrum.frequency_hz
        nodes = [
            np.linspace(grid[k], grid[k + 1], refine + 1)[:-1] for k in range(grid.size - 1)
        ]
        nu = np.append(np.concatenate(nodes), grid[-1])
        pref = (geometry.enhancement / geometry.distance_m) ** 2 * Z0 / TWO_PI
        self.nu = nu
        self.values = pref * horn_gain_linear(nu, geometry) * spectrum.value_at(nu)
        self.spectrum = spectrum
        self.geometry = geometry

    @property
    def support(self) -> tuple[float, float]:
        return float(self.nu[0]), float(self.nu[-1])

    def __call__(self, nu):
        return np.interp(nu, self.nu, self.values, left=0.0, right=0.0)


def spectral_intensity(
    spectrum: NoiseSpectrum, geometry: FieldGeometry, refine: int = 16
) -> SpectralIntensity:
    """I_nu(nu) = (A_sw^2/x^2)(c mu0/2 pi) G_L(nu) dP/dnu, zero off band."""
    return SpectralIntensity(spectrum, geometry, refine)


@dataclass(frozen=True)
class NoiseCouplings:
    """Lumped noise inputs to the master equation."""

    r_34: float = 0.0
    r_d3: float = 0.0
    r_e4: float = 0.0
    shift_3_hz: float = 0.0
    shift_4_hz: float = 0.0

    def __post_init__(self):
        if min(self.r_34, self.r_d3, self.r_e4) < 0:
            raise ConfigurationError("noise rates must be >= 0")


def _rate_from_intensity(intensity: SpectralIntensity, nu_fi_hz: float, dipole_ea0: float) -> float:
    # e^2 |<f|r|i>|^2 I_phys / (2 eps0 hbar^2 c) with I_phys = u / (2 c mu0)
    u = float(intensity(abs(nu_fi_hz)))
    return (dipole_ea0 * E_A0 / HBAR) ** 2 * u / 4.0


def noise_rate(
    i: RydbergState,
    f: RydbergState,
    intensity: SpectralIntensity,
    dipole_ea0: float,
    defects: QuantumDefectTable,
) -> float:
    """Golden-rule transition rate (1/s per atom) driven by the noise band.

    Symmetric in i <-> f; zero whenever |nu_fi| lies outside the band.
    """
    if abs(i.l - f.l) != 1 or abs(i.j - f.j) > 1.001:
        raise SelectionRuleError(f"dipole-forbidden pair {i.label} -> {f.label}")
    nu_fi = transition_frequency(i, f, defects)
    return _rate_from_intensity(intensity, nu_fi, dipole_ea0)


def lumped_rates(
    intensity: SpectralIntensity,
    perturbers_3,
    perturbers_4,
    driven_frequency_hz: float,
    driven_dipole_ea0: float,
) -> tuple[float, float, float]:
    """(R_34, R_d3, R_e4): driven-pair exchange plus sums into the fictive levels.

    The perturber lists must already exclude the two driven levels.
    """
    r_34 = _rate_from_intensity(intensity, driven_frequency_hz, driven_dipole_ea0)
    r_d3 = math.fsum(
        _rate_from_intensity(intensity, p.frequency_hz, p.dipole_ea0) for p in perturbers_3
    )
    r_e4 = math.fsum(
        _rate_from_intensity(intensity, p.frequency_hz, p.dipole_ea0) for p in perturbers_4
    )
    return r_34, r_d3, r_e4


# -- principal-value integral for the AC shift -------------------------------
#
# J(a) = PV int u(nu) / (nu^2 (nu^2 - a^2)) dnu over [lo, hi], u piecewise
# linear. Pieces away from the pole integrate analytically via
#   W0 = int dnu/(nu^2(nu^2-a^2)) = (1/a^2) [ (1/2a) ln|(nu-a)/(nu+a)| + 1/nu ]
#   W1 = int nu dnu/(nu^2(nu^2-a^2)) = (1/a^2) [ (1/2) ln|nu^2-a^2| - ln nu ]
# and a symmetric window around the pole is integrated as
# int_0^w [F(a+t) + F(a-t)] dt, which is regular when u is smooth at the pole
# (subtract-the-singularity in symmetrized form). A pole exactly at a band
# edge yields a finite quadrature value rather than a crash.

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _w0(nu: float, a: float) -> float:
    return (0.5 / a * math.log(abs((nu - a) / (nu + a))) + 1.0 / nu) / (a * a)


def _w1(nu: float, a: float) -> float:
    return (0.5 * math.log(abs(nu * nu - a * a)) - math.log(nu)) / (a * a)


def _analytic_piece(x0: float, x1: float, y0: float, y1: float, a: float) -> float:
    if x1 <= x0:
        return 0.0
    slope = (y1 - y0) / (x1 - x0)
    c0 = y0 - slope * x0
    return c0 * (_w0(x1, a) - _w0(x0, a)) + slope * (_w1(x1, a) - _w1(x0, a))


def pv_weighted_integral(
    nodes: np.ndarray,
    values: np.ndarray,
    a: float,
    lo: float,
    hi: float,
    exclusion_halfwidth: float = 1e6,
) -> float:
    """PV integral of u(nu)/(nu^2 (nu^2 - a^2)) over [lo, hi] for piecewise-linear u."""
    if lo <= 0:
        raise ConfigurationError("integration bounds must be positive frequencies")
    # u vanishes outside its node span; clip so no chord bridges the band edge
    lo = max(lo, float(nodes[0]))
    hi = min(hi, float(nodes[-1]))
    if hi <= lo:
        return 0.0
    a = abs(a)
    w = exclusion_halfwidth
    exc_lo = max(lo, a - w)
    exc_hi = min(hi, a + w)
    has_window = exc_lo < exc_hi

    def u_of(nu: float) -> float:
        return float(np.interp(nu, nodes, values, left=0.0, right=0.0))

    # analytic part over [lo, hi] minus the excised window, split at u's nodes
    pieces: list[float] = []
    segments = [(lo, exc_lo), (exc_hi, hi)] if has_window else [(lo, hi)]
    for s0, s1 in segments:
        if s1 <= s0:
            continue
        cuts = np.concatenate(([s0], nodes[(nodes > s0) & (nodes < s1)], [s1]))
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            pieces.append(_analytic_piece(x0, x1, u_of(x0), u_of(x1), a))
    total = math.fsum(pieces)

    if has_window:
        # symmetric quadrature over t = |nu - a| covering the excised region
        kinks = {w}
        for x in np.concatenate((nodes, [lo, hi])):
            d = abs(float(x) - a)
            if 0.0 < d < w:
                kinks.add(d)
        t0 = 0.0
        sym_pieces = []
        for t1 in sorted(kinks):
            half = 0.5 * (t1 - t0)
            mid = 0.5 * (t1 + t0)
            for xg, wg in zip(_GL_NODES, _GL_WEIGHTS):
                t = mid + half * xg
                f = 0.0
                for s in (1.0, -1.0):
                    nu = a + s * t
                    if lo <= nu <= hi:
                        f += u_of(nu) / (nu * nu * (nu * nu - a * a))
                sym_pieces.append(half * wg * f)
            t0 = t1
        total += math.fsum(sym_pieces)
    return total


def ac_shift(
    intensity: SpectralIntensity,
    perturbers,
    nu_min: float | None = None,
    nu_max: float | None = None,
    exclusion_halfwidth: float = 1e6,
) -> float:
    """Noise-induced AC level shift in Hz, summed over the perturber list.

    Each perturber term is (wp/hbar)^2 nu_fi^3 / (8 pi^2) times the PV
    integral of u(nu)/(nu^2(nu^2 - nu_fi^2)) across the band; the sign of
    nu_fi matters. nu_min/nu_max default to the band padded by one grid step.
    """
    lo, hi = intensity.support
    step = intensity.nu[1] - intensity.nu[0]
    lo = max(lo - step, step * 1e-6) if nu_min is None else nu_min
    hi = hi + step if nu_max is None else nu_max
    band_lo, band_hi = intensity.support
    if lo > band_lo or hi < band_hi:
        raise ConfigurationError("integration bounds must cover the noise band")
    terms = []
    for p in perturbers:
        pref = (p.dipole_ea0 * E_A0 / HBAR) ** 2 / (8.0 * math.pi**2)
        integral = pv_weighted_integral(
            intensity.nu, intensity.values, p.frequency_hz, lo, hi, exclusion_halfwidth
        )
        terms.append(pref * p.frequency_hz**3 * integral)
    return math.fsum(terms)


def noise_couplings(
    spectrum: NoiseSpectrum,
    geometry: FieldGeometry,
    state_3: RydbergState,
    state_4: RydbergState,
    defects: QuantumDefectTable,
    n_window: int = 10,
    exclusion_halfwidth: float = 1e6,
    grid_step: float = 0.01,
    use_numba: bool | None = None,
) -> NoiseCouplings:
    """All five noise inputs for the driven pair (rates for f != 3,4; shifts for f != i)."""
    from .structure import dipole_moment, enumerate_perturbers

    intensity = spectral_intensity(spectrum, geometry)
    kw = dict(grid_step=grid_step, use_numba=use_numba)
    pert3 = enumerate_perturbers(state_3, n_window, defects, exclude=state_4, **kw)
    pert4 = enumerate_perturbers(state_4, n_window, defects, exclude=state_3, **kw)
    nu_34 = transition_frequency(state_3, state_4, defects)
    dip_34 = dipole_moment(state_3, state_4, defects, **kw).total_ea0
    r_34, r_d3, r_e4 = lumped_rates(intensity, pert3, pert4, nu_34, dip_34)
    # shifts sum over all f != i, so the driven partner is reinstated
    shift3_list = pert3 + [Perturber(state_4, nu_34, dip_34)]
    shift4_list = pert4 + [Perturber(state_3, -nu_34, dip_34)]
    shift_3 = ac_shift(intensity, shift3_list, exclusion_halfwidth=exclusion_halfwidth)
    shift_4 = ac_shift(intensity, shift4_list, exclusion_halfwidth=exclusion_halfwidth)
    return NoiseCouplings(r_34=r_34, r_d3=r_d3, r_e4=r_e4, shift_3_hz=shift_3, shift_4_hz=shift_4)


__all__ = [
    "FieldGeometry",
    "NoiseCouplings",
    "NoiseSpectrum",
    "SpectralIntensity",
    "ac_shift",
    "combine_spectra",
    "horn_gain_db",
    "horn_gain_linear",
    "load_noise_psd",
    "lumped_rates",
    "make_rect_spectrum",
    "noise_couplings",
    "noise_rate",
    "pv_weighted_integral",
    "spectral_intensity",
]
