import math

import pytest

from rydnoise.lindblad import DecayParameters, DriveParameters
from rydnoise.noise import FieldGeometry, make_rect_spectrum
from rydnoise.spectroscopy import CellParameters, ForwardModel
from rydnoise.structure import QuantumDefectTable, RydbergState

TWO_PI = 2.0 * math.pi
GAMMA_2 = TWO_PI * 6.0666e6


def dbm(value):
    return 10.0 ** (value / 10.0) * 1e-3


@pytest.fixture(scope="session")
def rb85():
    from rydnoise.config import validate_config, builtin_config_path

    cfg = validate_config(builtin_config_path("paper-filter2"))
    return cfg.defect_table()


@pytest.fixture(scope="session")
def state_3():
    return RydbergState(57, 0, 0.5)


@pytest.fixture(scope="session")
def state_4():
    return RydbergState(57, 1, 0.5)


@pytest.fixture(scope="session")
def hydrogen():
    return QuantumDefectTable.hydrogen()


@pytest.fixture(scope="session")
def geometry():
    return FieldGeometry(distance_m=0.342, enhancement=1.73)


@pytest.fixture(scope="session")
def filter_spectra():
    return {
        1: make_rect_spectrum(20.7e9, 1e9, dbm(5.4)),
        2: make_rect_spectrum(19.7e9, 1e9, dbm(6.0)),
        3: make_rect_spectrum(18.7e9, 1e9, dbm(6.6)),
    }


@pytest.fixture(scope="session")
def filter_couplings(filter_spectra, geometry, rb85, state_3, state_4):
    from rydnoise.noise import noise_couplings

    def compute(num, attenuation_db=0.0):
        return noise_couplings(
            filter_spectra[num].attenuated(attenuation_db), geometry, state_3, state_4, rb85
        )

    return compute


@pytest.fixture(scope="session")
def weak_probe_model():
    """Paper-like cell with a deliberately weak probe (Omega_p = Gamma_2/50)."""
    drives = DriveParameters(omega_p=GAMMA_2 / 50.0, omega_c=TWO_PI * 2.3e6)
    decays = DecayParameters(gamma_2=GAMMA_2, gamma_3=TWO_PI * 1e4, gamma_4=TWO_PI * 1e4)
    return ForwardModel(
        drives=drives,
        decays=decays,
        cell=CellParameters(),
        probe_dipole_ea0=2.99,
        n_velocity=3201,
    )


@pytest.fixture(scope="session")
def rf_dipole_ea0(rb85, state_3, state_4):
    from rydnoise.structure import dipole_moment

    return dipole_moment(state_3, state_4, rb85).total_ea0


def interpolated_peaks(spectrum, min_count=0):
    """All local maxima with parabolic refinement, sorted by height (desc)."""
    t = spectrum.transmission
    nu = spectrum.detuning_hz
    step = nu[1] - nu[0]
    out = []
    for k in range(1, len(t) - 1):
        if t[k] > t[k - 1] and t[k] >= t[k + 1]:
            denom = t[k - 1] - 2 * t[k] + t[k + 1]
            shift = 0.0 if denom == 0 else 0.5 * (t[k - 1] - t[k + 1]) / denom
            out.append((nu[k] + shift * step, t[k]))
    out.sort(key=lambda p: -p[1])
    assert len(out) >= min_count
    return out
