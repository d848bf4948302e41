"""Physical constants used throughout, in SI units (CODATA via scipy)."""

from scipy.constants import (
    c as C_c,
    e as C_e,
    epsilon_0 as EPS0,
    h as C_h,
    hbar as HBAR,
    k as KB,
    m_e as M_E,
    mu_0 as MU0,
    physical_constants,
)

A0 = physical_constants["Bohr radius"][0]          # m
RYD_INF_HZ = physical_constants["Rydberg constant times c in Hz"][0]
AMU = physical_constants["atomic mass constant"][0]  # kg

E_A0 = C_e * A0   # dipole unit e*a0 in C*m

# Atomic masses (kg)
MASS_RB85 = 84.911789738 * AMU
MASS_RB87 = 86.909180531 * AMU

# Free-space impedance c*mu0 (ohm); 2*Z0 converts a squared-field-amplitude
# spectral density (V/m)^2/Hz into a true intensity W/(m^2 Hz).
Z0 = C_c * MU0

__all__ = [
    "A0", "AMU", "C_c", "C_e", "C_h", "EPS0", "E_A0", "HBAR", "KB",
    "MASS_RB85", "MASS_RB87", "M_E", "MU0", "RYD_INF_HZ", "Z0",
]
