import math

import numpy as np
import pytest
from scipy.constants import c, epsilon_0, hbar, mu_0
from scipy.constants import physical_constants

from rydnoise.exceptions import ConfigurationError, SelectionRuleError
from rydnoise.noise import (
    FieldGeometry,
    NoiseCouplings,
    ac_shift,
    combine_spectra,
    horn_gain_db,
    horn_gain_linear,
    load_noise_psd,
    lumped_rates,
    make_rect_spectrum,
    noise_couplings,
    noise_rate,
    pv_weighted_integral,
    spectral_intensity,
)
from rydnoise.structure import Perturber, RydbergState, transition_frequency

E_A0 = physical_constants["elementary charge"][0] * physical_constants["Bohr radius"][0]


def dbm(x):
    return 10.0 ** (x / 10.0) * 1e-3


class TestNoiseSpectrum:
    def test_filter2_rectangle_psd_level(self):
        spec = make_rect_spectrum(19.7e9, 1e9, dbm(6.0))
        assert spec.value_at(19.7e9) == pytest.approx(3.9811e-12, rel=1e-4)
        assert spec.value_at(21e9) == 0.0

    def test_zero_power(self):
        spec = make_rect_spectrum(19.7e9, 1e9, 0.0)
        assert np.all(spec.psd_w_per_hz == 0.0)
        assert spec.integrated_power_w == 0.0

    def test_integrated_power_roundtrip(self):
        power = dbm(6.0)
        spec = make_rect_spectrum(19.7e9, 1e9, power)
        assert abs(spec.integrated_power_w - power) / power < 1e-12

    def test_invalid_inputs(self):
        with pytest.raises(ConfigurationError):
            make_rect_spectrum(19.7e9, -1e9, 1e-3)
        with pytest.raises(ConfigurationError):
            make_rect_spectrum(1e3, 1e9, 1e-3)  # band reaches nu <= 0

    def test_attenuation_scales_power(self):
        spec = make_rect_spectrum(19.7e9, 1e9, dbm(6.0))
        att = spec.attenuated(-6.0)
        assert att.integrated_power_w == pytest.approx(
            spec.integrated_power_w * 10 ** -0.6, rel=1e-12
        )

    def test_combine_disjoint_bands(self):
        combo = combine_spectra(
            [make_rect_spectrum(18.7e9, 1e9, 1e-3), make_rect_spectrum(20.7e9, 1e9, 1e-3)]
        )
        assert combo.integrated_power_w == pytest.approx(2e-3, rel=1e-6)
        assert combo.value_at(19.7e9) == 0.0
        assert combo.value_at(20.7e9) == pytest.approx(1e-12, rel=1e-6)


class TestLoadNoisePsd:
    def test_identity_load(self, tmp_path):
        f = tmp_path / "psd.csv"
        f.write_text("# units: Hz,W_per_Hz\n19.2e9,4.0e-12\n19.7e9,4.0e-12\n20.2e9,4.0e-12\n")
        spec = load_noise_psd(f)
        assert spec.integrated_power_w == pytest.approx(4.0e-12 * 1e9, rel=1e-12)

    def test_dbm_per_hz_conversion(self, tmp_path):
        # 0 dBm/Hz = 1e-3 W/Hz by hand
        f = tmp_path / "psd.csv"
        f.write_text("# units: GHz,dBm_per_Hz\n19.2,0.0\n20.2,0.0\n")
        spec = load_noise_psd(f)
        assert spec.frequency_hz[0] == 19.2e9
        assert spec.psd_w_per_hz[0] == pytest.approx(1e-3, rel=1e-12)

    def test_rescale_to_filter1_power(self, tmp_path):
        f = tmp_path / "psd.csv"
        f.write_text("# units: Hz,W_per_Hz\n20.2e9,1.0e-12\n21.2e9,3.0e-12\n")
        spec = load_noise_psd(f, total_power_w=dbm(5.4))
        assert spec.integrated_power_w == pytest.approx(dbm(5.4), rel=1e-9)

    def test_missing_units_header(self, tmp_path):
        f = tmp_path / "psd.csv"
        f.write_text("19.2e9,4.0e-12\n20.2e9,4.0e-12\n")
        with pytest.raises(ConfigurationError, match=":1"):
            load_noise_psd(f)

    def test_non_monotone_grid(self, tmp_path):
        f = tmp_path / "psd.csv"
        f.write_text("# units: Hz,W_per_Hz\n20.2e9,4e-12\n19.2e9,4e-12\n")
        with pytest.raises(ConfigurationError, match="increasing"):
            load_noise_psd(f)

    def test_negative_psd(self, tmp_path):
        f = tmp_path / "psd.csv"
        f.write_text("# units: Hz,W_per_Hz\n19.2e9,4e-12\n20.2e9,-1e-12\n")
        with pytest.raises(ConfigurationError, match="negative"):
            load_noise_psd(f)


class TestHornGain:
    def test_reference_frequency(self, geometry):
        assert horn_gain_linear(18e9, geometry) == pytest.approx(10**1.5, rel=1e-12)

    def test_paper_gain_at_rf(self, geometry):
        assert horn_gain_db(19.78e9, geometry) == pytest.approx(15.628, abs=2e-3)
        # consistent with the quoted ~15.7 dB
        assert abs(horn_gain_db(19.78e9, geometry) - 15.7) < 0.1

    def test_zero_slope_constant(self):
        geom = FieldGeometry(distance_m=0.342, enhancement=1.73, gain_slope_db_per_ghz=0.0)
        assert horn_gain_linear(25e9, geom) == horn_gain_linear(18e9, geom)


class TestSpectralIntensity:
    def test_filter2_band_value(self, geometry):
        spec = make_rect_spectrum(19.7e9, 1e9, dbm(6.0))
        intensity = spectral_intensity(spec, geometry)
        # independent arithmetic: (A/x)^2 (c mu0/2pi) G dP/dnu
        expect = (
            (1.73 / 0.342) ** 2
            * c
            * mu_0
            / (2 * math.pi)
            * 10 ** ((15 + 3 * (19.7 - 18) / 8.5) / 10)
            * dbm(6.0)
            / 1e9
        )
        assert intensity(19.7e9) == pytest.approx(expect, rel=1e-6)
        # the spec-sheet rounding of the same number
        assert intensity(19.7e9) == pytest.approx(2.23e-7, rel=0.01)

    def test_zero_outside_band(self, geometry):
        spec = make_rect_spectrum(19.7e9, 1e9, dbm(6.0))
        intensity = spectral_intensity(spec, geometry)
        assert intensity(25e9) == 0.0
        assert intensity(10e9) == 0.0

    def test_enhancement_quadratic(self):
        spec = make_rect_spectrum(19.7e9, 1e9, dbm(6.0))
        g1 = FieldGeometry(distance_m=0.342, enhancement=1.0)
        g2 = FieldGeometry(distance_m=0.342, enhancement=2.0)
        assert spectral_intensity(spec, g2)(19.7e9) == pytest.approx(
            4.0 * spectral_intensity(spec, g1)(19.7e9), rel=1e-12
        )

    def test_zero_spectrum(self, geometry):
        intensity = spectral_intensity(make_rect_spectrum(19.7e9, 1e9, 0.0), geometry)
        assert intensity(19.7e9) == 0.0


class TestNoiseRate:
    def test_zero_intensity(self, geometry, rb85, state_3, state_4):
        intensity = spectral_intensity(make_rect_spectrum(19.7e9, 1e9, 0.0), geometry)
        assert noise_rate(state_3, state_4, intensity, 1120.0, rb85) == 0.0

    def test_out_of_band(self, geometry, rb85, state_3):
        intensity = spectral_intensity(make_rect_spectrum(30e9, 1e9, dbm(6.0)), geometry)
        assert noise_rate(state_3, RydbergState(57, 1, 1.5), intensity, 1500.0, rb85) == 0.0

    def test_driven_pair_rate_value(self, geometry, rb85, state_3, state_4):
        # golden-rule oracle: R = d^2 I_phys / (2 eps0 hbar^2 c) with the
        # squared-amplitude density converted via I_phys = u / (2 c mu0)
        spec = make_rect_spectrum(19.7e9, 1e9, dbm(6.0))
        intensity = spectral_intensity(spec, geometry)
        nu = abs(transition_frequency(state_3, state_4, rb85))
        d = 1120.0 * E_A0
        expect = d**2 * (intensity(nu) / (2 * c * mu_0)) / (2 * epsilon_0 * hbar**2 * c)
        got = noise_rate(state_3, state_4, intensity, 1120.0, rb85)
        assert got == pytest.approx(expect, rel=1e-9)
        assert got == pytest.approx(4.53e8, rel=0.01)

    def test_symmetric(self, geometry, rb85, state_3, state_4):
        intensity = spectral_intensity(make_rect_spectrum(19.7e9, 1e9, dbm(6.0)), geometry)
        assert noise_rate(state_3, state_4, intensity, 1120.0, rb85) == noise_rate(
            state_4, state_3, intensity, 1120.0, rb85
        )

    def test_forbidden_pair(self, geometry, rb85, state_3):
        intensity = spectral_intensity(make_rect_spectrum(19.7e9, 1e9, dbm(6.0)), geometry)
        with pytest.raises(SelectionRuleError):
            noise_rate(state_3, RydbergState(57, 2, 2.5), intensity, 1.0, rb85)


class TestLumpedRates:
    def test_band_with_no_transitions(self, geometry, rb85, state_3, state_4, filter_spectra):
        from rydnoise.structure import enumerate_perturbers

        intensity = spectral_intensity(filter_spectra[3], geometry)  # 18.2-19.2 GHz
        p3 = enumerate_perturbers(state_3, 10, rb85, exclude=state_4)
        p4 = enumerate_perturbers(state_4, 10, rb85, exclude=state_3)
        nu34 = transition_frequency(state_3, state_4, rb85)
        r34, rd3, re4 = lumped_rates(intensity, p3, p4, nu34, 1120.0)
        assert r34 == rd3 == re4 == 0.0

    def test_band_covering_only_driven_line(self, geometry, rb85, state_3, state_4):
        from rydnoise.structure import enumerate_perturbers

        intensity = spectral_intensity(make_rect_spectrum(19.75e9, 0.3e9, dbm(6.0)), geometry)
        p3 = enumerate_perturbers(state_3, 10, rb85, exclude=state_4)
        p4 = enumerate_perturbers(state_4, 10, rb85, exclude=state_3)
        nu34 = transition_frequency(state_3, state_4, rb85)
        r34, rd3, re4 = lumped_rates(intensity, p3, p4, nu34, 1120.0)
        assert r34 > 0
        assert rd3 == 0.0 and re4 == 0.0

    def test_splitting_band_preserves_rates(self, geometry, rb85, state_3, state_4):
        from rydnoise.structure import enumerate_perturbers

        p3 = enumerate_perturbers(state_3, 10, rb85, exclude=state_4)
        p4 = enumerate_perturbers(state_4, 10, rb85, exclude=state_3)
        nu34 = transition_frequency(state_3, state_4, rb85)
        whole = spectral_intensity(make_rect_spectrum(20.7e9, 1e9, dbm(5.4)), geometry)
        halves = spectral_intensity(
            combine_spectra(
                [
                    make_rect_spectrum(20.45e9, 0.5e9, dbm(5.4) / 2),
                    make_rect_spectrum(20.95e9, 0.5e9, dbm(5.4) / 2),
                ]
            ),
            geometry,
        )
        r_whole = lumped_rates(whole, p3, p4, nu34, 1120.0)
        r_halves = lumped_rates(halves, p3, p4, nu34, 1120.0)
        assert r_halves == pytest.approx(r_whole, rel=1e-5)


class TestAcShift:
    def test_zero_intensity(self, geometry, rb85, state_3, state_4):
        intensity = spectral_intensity(make_rect_spectrum(19.7e9, 1e9, 0.0), geometry)
        pert = [Perturber(state_4, 19.7825e9, 1120.0)]
        assert ac_shift(intensity, pert) == 0.0

    def test_off_band_closed_form(self, geometry):
        # flat-gain geometry so the intensity is exactly constant on the band
        geom = FieldGeometry(distance_m=0.342, enhancement=1.73, gain_slope_db_per_ghz=0.0)
        spec = make_rect_spectrum(20.7e9, 1e9, dbm(5.4))
        intensity = spectral_intensity(spec, geom)
        a = 19.7825e9
        lo, hi = 20.2e9, 21.2e9
        u0 = intensity(20.7e9)

        def w0(nu):
            return (0.5 / a * math.log(abs((nu - a) / (nu + a))) + 1.0 / nu) / a**2

        expect = u0 * (w0(hi) - w0(lo))
        got = pv_weighted_integral(intensity.nu, intensity.values, a, lo, hi)
        assert got == pytest.approx(expect, rel=1e-10)

    def test_blue_band_blue_shifts_lower_level(self, filter_couplings):
        c1 = filter_couplings(1)
        assert c1.shift_3_hz > 30e6  # +62 MHz scale in the source data

    def test_red_band_red_shifts(self, filter_couplings):
        c3 = filter_couplings(3)
        assert c3.shift_3_hz < -5e6

    def test_pv_window_halving(self, geometry, rb85, state_3, state_4):
        from rydnoise.structure import enumerate_perturbers

        intensity = spectral_intensity(make_rect_spectrum(20.7e9, 1e9, dbm(5.4)), geometry)
        pert = enumerate_perturbers(state_3, 10, rb85)  # includes the in-band 57P3/2 pole
        s1 = ac_shift(intensity, pert, exclusion_halfwidth=1e6)
        s2 = ac_shift(intensity, pert, exclusion_halfwidth=5e5)
        assert abs(s2 - s1) / abs(s1) < 5e-3

    def test_refinement_doubling(self, geometry, rb85, state_3, state_4):
        from rydnoise.structure import enumerate_perturbers

        spec = make_rect_spectrum(20.7e9, 1e9, dbm(5.4))
        pert = enumerate_perturbers(state_3, 10, rb85)
        s1 = ac_shift(spectral_intensity(spec, geometry, refine=16), pert)
        s2 = ac_shift(spectral_intensity(spec, geometry, refine=32), pert)
        assert abs(s2 - s1) / abs(s1) < 1e-3

    def test_pole_at_band_edge_no_crash(self, geometry):
        spec = make_rect_spectrum(20.7e9, 1e9, dbm(5.4))
        intensity = spectral_intensity(spec, geometry)
        pert = [Perturber(RydbergState(58, 1, 0.5), 20.2e9, 1000.0)]
        value = ac_shift(intensity, pert)
        assert math.isfinite(value)

    def test_bounds_must_cover_band(self, geometry):
        intensity = spectral_intensity(make_rect_spectrum(19.7e9, 1e9, dbm(6.0)), geometry)
        with pytest.raises(ConfigurationError):
            ac_shift(intensity, [], nu_min=19.5e9, nu_max=21e9)


class TestLinearity:
    def test_rates_and_shifts_linear_in_power(self, geometry, rb85, state_3, state_4):
        rng = np.random.default_rng(11)
        for _ in range(3):
            power = float(rng.uniform(0.5e-3, 5e-3))
            spec = make_rect_spectrum(20.4e9, 1.3e9, power)
            c1 = noise_couplings(spec, geometry, state_3, state_4, rb85, n_window=4)
            c2 = noise_couplings(spec.scaled(2.0), geometry, state_3, state_4, rb85, n_window=4)
            assert c2.r_d3 == pytest.approx(2 * c1.r_d3, rel=1e-9)
            assert c2.r_e4 == pytest.approx(2 * c1.r_e4, rel=1e-9)
            assert c2.shift_3_hz == pytest.approx(2 * c1.shift_3_hz, rel=1e-9)
            assert c2.shift_4_hz == pytest.approx(2 * c1.shift_4_hz, rel=1e-9)

    def test_band_limit_support(self, geometry, rb85, state_3, state_4):
        # every transition outside the grid support contributes zero rate
        spec = make_rect_spectrum(19.78e9, 0.1e9, dbm(6.0))
        c = noise_couplings(spec, geometry, state_3, state_4, rb85)
        assert c.r_d3 == 0.0 and c.r_e4 == 0.0 and c.r_34 > 0.0

    def test_negative_rate_rejected(self):
        with pytest.raises(ConfigurationError):
            NoiseCouplings(r_34=-1.0)


class TestPerturberWindow:
    def test_window_convergence_10_vs_15(self, geometry, rb85, state_3, state_4, filter_spectra):
        for num in (1, 3):
            c10 = noise_couplings(filter_spectra[num], geometry, state_3, state_4, rb85, n_window=10)
            c15 = noise_couplings(filter_spectra[num], geometry, state_3, state_4, rb85, n_window=15)
            assert abs(c15.shift_3_hz - c10.shift_3_hz) < 0.01 * abs(c10.shift_3_hz)
            assert abs(c15.shift_4_hz - c10.shift_4_hz) < 0.01 * abs(c10.shift_4_hz)
