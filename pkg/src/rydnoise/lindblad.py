"""Six-level master equation: Hamiltonian, Liouvillian, steady state, and a
time-propagation oracle.

Basis ordering is (|1>, |2>, |3>, |4>, |d>, |e>) = indices 0..5, a ladder
1-2-3-4 driven by probe, coupling and RF fields in the rotating frame, plus
two fictive reservoir levels that exchange population incoherently with |3>
and |4> and never carry coherences. Sign conventions: detunings are
laser-minus-atom; the diagonal carries -(cumulative detuning), so a positive
AC level shift on |3> moves the EIT resonance to positive coupling detuning.
Counter-propagating beams Doppler-shift the probe by -k_p v and the coupling
by +k_c v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import (
    AmbiguousSteadyStateError,
    ConfigurationError,
    IntegrationFailureError,
    NumericalError,
)
from .noise import NoiseCouplings

N_LEVELS = 6
FICTIVE = (4, 5)
TWO_PI = 2.0 * math.pi

# Reduced coordinate set: the 6 populations then the 12 coherences within
# the coherent 4-level block. Coherences involving |d>, |e> are identically
# zero and are excluded. Kernel code relies on the populations coming first.
COORDS: tuple[tuple[int, int], ...] = tuple(
    [(k, k) for k in range(N_LEVELS)]
    + [(i, j) for i in range(4) for j in range(4) if i != j]
)
COORD_INDEX = {c: k for k, c in enumerate(COORDS)}
_VEC_SEL = np.array([N_LEVELS * i + j for i, j in COORDS])


@dataclass(frozen=True)
class DriveParameters:
    """Rabi frequencies and detunings of the three coherent drives (rad/s)."""

    omega_p: float = 0.0
    omega_c: float = 0.0
    omega_rf: float = 0.0
    delta_p: float = 0.0
    delta_c: float = 0.0
    delta_rf: float = 0.0

    def __post_init__(self):
        if min(self.omega_p, self.omega_c, self.omega_rf) < 0:
            raise ConfigurationError("Rabi frequencies must be >= 0 (phases absorbed)")


@dataclass(frozen=True)
class DecayParameters:
    """Population decay rates, their branching targets, and noise couplings (1/s)."""

    gamma_2: float
    gamma_3: float = 0.0
    gamma_4: float = 0.0
    branch_3: int = 1
    branch_4: int = 2
    gamma_extra: float = 0.0
    couplings: NoiseCouplings = field(default_factory=NoiseCouplings)

    def __post_init__(self):
        if min(self.gamma_2, self.gamma_3, self.gamma_4, self.gamma_extra) < 0:
            raise ConfigurationError("decay rates must be >= 0")
        if self.branch_3 not in (0, 1) or self.branch_4 not in (0, 1, 2):
            raise ConfigurationError("decay branches must target a lower ladder level")


@dataclass(frozen=True)
class DensityMatrix:
    """6x6 density matrix with physicality checks at construction."""

    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (N_LEVELS, N_LEVELS):
            raise ConfigurationError("density matrix must be 6x6")
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise NumericalError("density matrix not Hermitian")
        if abs(rho.trace().real - 1.0) > 1e-8 or abs(rho.trace().imag) > 1e-10:
            raise NumericalError("density matrix trace != 1")
        diag = rho.diagonal().real
        if diag.min() < -1e-8 or diag.max() > 1.0 + 1e-8:
            raise NumericalError("population outside [0, 1]")
        for i, j in ((0, 4), (1, 4), (2, 4), (3, 4), (0, 5), (1, 5), (2, 5), (3, 5), (4, 5)):
            if abs(rho[i, j]) > 1e-12 or abs(rho[j, i]) > 1e-12:
                raise NumericalError("coherence involving a fictive level is nonzero")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "matrix", rho)

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real

    def coherence(self, i: int, j: int) -> complex:
        return complex(self.matrix[i, j])


def build_hamiltonian(
    drives: DriveParameters,
    shifts_hz: tuple[float, float] = (0.0, 0.0),
    velocity: float = 0.0,
    wavelengths: tuple[float, float] = (780.241e-9, 479.9285e-9),
) -> np.ndarray:
    """RWA ladder Hamiltonian (rad/s) with Doppler shifts and noise AC shifts."""
    k_p = TWO_PI / wavelengths[0]
    k_c = TWO_PI / wavelengths[1]
    d_p = drives.delta_p - k_p * velocity
    d_c = drives.delta_c + k_c * velocity
    h = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    h[0, 1] = h[1, 0] = drives.omega_p / 2.0
    h[1, 2] = h[2, 1] = drives.omega_c / 2.0
    h[2, 3] = h[3, 2] = drives.omega_rf / 2.0
    h[1, 1] = -d_p
    h[2, 2] = -(d_p + d_c) + TWO_PI * shifts_hz[0]
    h[3, 3] = -(d_p + d_c + drives.delta_rf) + TWO_PI * shifts_hz[1]
    return h


def _jump_operators(decays: DecayParameters) -> list[np.ndarray]:
    ops = []

    def jump(rate: float, to: int, frm: int):
        if rate > 0:
            c = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
            c[to, frm] = math.sqrt(rate)
            ops.append(c)

    jump(decays.gamma_2, 0, 1)
    jump(decays.gamma_3, decays.branch_3, 2)
    jump(decays.gamma_4, decays.branch_4, 3)
    nc = decays.couplings
    jump(nc.r_34, 3, 2)
    jump(nc.r_34, 2, 3)
    jump(nc.r_d3, 4, 2)
    jump(nc.r_d3, 2, 4)
    jump(nc.r_e4, 5, 3)
    jump(nc.r_e4, 3, 5)
    if decays.gamma_extra > 0:
        for lvl in (2, 3):
            c = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
            c[lvl, lvl] = math.sqrt(2.0 * decays.gamma_extra)
            ops.append(c)
    return ops


def build_liouvillian(h: np.ndarray, decays: DecayParameters) -> np.ndarray:
    """Lindblad generator as a 36x36 matrix acting on row-major vec(rho)."""
    if np.abs(h - h.conj().T).max() > 1e-12:
        raise ConfigurationError("Hamiltonian must be Hermitian")
    eye = np.eye(N_LEVELS)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in _jump_operators(decays):
        cdc = c.conj().T @ c
        lv += np.kron(c, c.conj())
        lv -= 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
    return lv


def reduce_liouvillian(lv: np.ndarray) -> np.ndarray:
    """Restrict to the 18 physical coordinates; fictive coherences must decouple."""
    keep = _VEC_SEL
    drop = np.setdiff1d(np.arange(N_LEVELS * N_LEVELS), keep)
    if np.abs(lv[np.ix_(keep, drop)]).max() > 1e-12:
        raise NumericalError("fictive-level coherences couple into the kept block")
    return lv[np.ix_(keep, keep)]


def pin_zero_rows(l18: np.ndarray) -> np.ndarray:
    """Pin coordinates with no dynamics (exactly zero rows) to zero.

    A zero row means nothing flows into or out of that coordinate (e.g. a
    fictive level with vanishing exchange rate, or |4> with the RF off and
    no decay), so the steady state reachable from the ground state has it
    exactly zero. Pinning removes the spurious null directions.
    """
    out = l18.copy()
    for k in np.nonzero(~np.any(out != 0.0, axis=1))[0]:
        out[k, k] = 1.0
    return out


def with_trace_row(l18: np.ndarray) -> np.ndarray:
    """Replace the rho_11 equation with the unit-trace constraint (rhs = e0)."""
    out = l18.copy()
    out[0, :] = 0.0
    out[0, :N_LEVELS] = 1.0
    return out


def _expand(vec18: np.ndarray) -> np.ndarray:
    rho = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    for k, (i, j) in enumerate(COORDS):
        rho[i, j] = vec18[k]
    return rho


def steady_state(lv: np.ndarray) -> DensityMatrix:
    """Unique steady state of a trace-preserving Liouvillian.

    Solves the reduced linear system with the trace constraint replacing the
    redundant rho_11 row; dynamically disconnected coordinates are pinned to
    zero first. Raises AmbiguousSteadyStateError when the null space is
    degenerate (e.g. gamma_2 = 0).
    """
    l18 = reduce_liouvillian(lv)
    system = with_trace_row(pin_zero_rows(l18))
    rhs = np.zeros(len(COORDS), dtype=complex)
    rhs[0] = 1.0
    try:
        vec = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise AmbiguousSteadyStateError(f"steady-state system singular: {exc}") from exc
    scale = np.abs(l18).max()
    residual = np.abs(l18 @ vec).max()  # pinned rows are zero rows, contributing 0
    if scale > 0 and residual > 1e-10 * scale:
        raise AmbiguousSteadyStateError(
            f"steady-state residual {residual:.3e} exceeds 1e-10 * |L| = {1e-10 * scale:.3e}"
        )
    return DensityMatrix(_expand(vec))


def relaxation_gap(lv: np.ndarray) -> float:
    """Slowest nonzero relaxation rate (1/s) of the reduced generator.

    Sets the horizon needed for time propagation to reach the steady state:
    transients decay as exp(-gap t).
    """
    l18 = pin_zero_rows(reduce_liouvillian(lv))
    eigs = np.linalg.eigvals(l18)
    scale = np.abs(eigs).max()
    decaying = [-e.real for e in eigs if e.real < -1e-12 * max(scale, 1.0)]
    if not decaying:
        raise AmbiguousSteadyStateError("generator has no decaying modes")
    return float(min(decaying))


def time_evolve(
    lv: np.ndarray,
    rho0: np.ndarray | DensityMatrix,
    t: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> DensityMatrix:
    """Propagate drho/dt = L(rho) to time t with an adaptive explicit integrator."""
    if isinstance(rho0, DensityMatrix):
        rho0 = rho0.matrix
    y0 = np.asarray(rho0, dtype=complex).reshape(-1)
    sol = solve_ivp(
        lambda _t, y: lv @ y,
        (0.0, t),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=False,
    )
    if not sol.success:
        raise IntegrationFailureError(f"time evolution failed: {sol.message}")
    rho = sol.y[:, -1].reshape(N_LEVELS, N_LEVELS)
    if abs(rho.trace().real - 1.0) > 1e-9 or np.abs(rho - rho.conj().T).max() > 1e-9:
        raise IntegrationFailureError("trace/Hermiticity drifted beyond 1e-9")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def scan_coefficients(scan: str, wavelengths: tuple[float, float]):
    """Per-coordinate diagonal coefficients for the steady-state grid kernel.

    Returns (cs, cv): the scan-detuning and velocity coefficients of the
    -i(h_i - h_j) diagonal update for every reduced coordinate, relative to
    the scan = 0, v = 0 Hamiltonian.
    """
    k_p = TWO_PI / wavelengths[0]
    k_c = TWO_PI / wavelengths[1]
    if scan == "coupling":
        scan_vec = np.array([0.0, 0.0, -1.0, -1.0, 0.0, 0.0])
    elif scan == "probe":
        scan_vec = np.array([0.0, -1.0, -1.0, -1.0, 0.0, 0.0])
    else:
        raise ConfigurationError(f"unknown scan mode {scan!r}")
    dopp_vec = np.array([0.0, k_p, k_p - k_c, k_p - k_c, 0.0, 0.0])
    cs = np.array([scan_vec[i] - scan_vec[j] for i, j in COORDS])
    cv = np.array([dopp_vec[i] - dopp_vec[j] for i, j in COORDS])
    return cs, cv


__all__ = [
    "COORDS",
    "COORD_INDEX",
    "DecayParameters",
    "DensityMatrix",
    "DriveParameters",
    "build_hamiltonian",
    "build_liouvillian",
    "pin_zero_rows",
    "reduce_liouvillian",
    "relaxation_gap",
    "scan_coefficients",
    "steady_state",
    "time_evolve",
    "with_trace_row",
]
