"""Alkali Rydberg structure: quantum-defect energies, Numerov radial integrals,
dipole matrix elements, and enumeration of dipole-allowed perturbing states.

Energies follow the Rydberg-Ritz form E = -Ry / (n - delta(n))^2 with
delta(n) = delta0 + delta2 / (n - delta0)^2 and a mass-corrected Rydberg
constant supplied by the quantum-defect table. Radial wavefunctions are
quantum-defect Coulomb wavefunctions integrated inward with Numerov on a
sqrt(r) grid (mu = 1; the reduced-mass correction only moves matrix elements
at the 1e-5 level and is ignored). Angular factors come from standard
angular-momentum algebra; for the linearly polarized (q = 0) driven pair
57S1/2 - 57P1/2 the net factor is exactly 1/3.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .angular import dipole_angular_factor
from .constants import RYD_INF_HZ
from .exceptions import ConfigurationError, SelectionRuleError
from .kernels import numerov_inward

L_LETTERS = "SPDFGHIKLMN"


@dataclass(frozen=True, order=True)
class RydbergState:
    """A fine-structure state |n, l, j> with an optional m_j."""

    n: int
    l: int
    j: float
    m_j: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"n must be a positive integer, got {self.n}")
        if not 0 <= self.l < self.n:
            raise ConfigurationError(f"need 0 <= l < n, got l={self.l}, n={self.n}")
        allowed_j = {self.l + 0.5} if self.l == 0 else {self.l - 0.5, self.l + 0.5}
        if self.j not in allowed_j:
            raise ConfigurationError(f"j={self.j} invalid for l={self.l}")
        if self.m_j is not None:
            if abs(self.m_j) > self.j or abs(2 * self.m_j - round(2 * self.m_j)) > 1e-9:
                raise ConfigurationError(f"m_j={self.m_j} invalid for j={self.j}")

    @property
    def label(self) -> str:
        letter = L_LETTERS[self.l] if self.l < len(L_LETTERS) else f"(l={self.l})"
        return f"{self.n}{letter}{int(2 * self.j)}/2"

    def same_level(self, other: "RydbergState") -> bool:
        return (self.n, self.l, self.j) == (other.n, other.l, other.j)


@dataclass(frozen=True)
class QuantumDefectTable:
    """Rydberg-Ritz coefficients per (l, j) series plus the Rydberg constant.

    ``series`` maps (l, 2j) -> (delta0, delta2). Immutable after load;
    looking up an unknown series raises ConfigurationError.
    """

    series: tuple[tuple[int, int, float, float], ...]
    rydberg_constant_hz: float
    core_radius_a0: float = 0.05
    species: str = ""
    _lookup: dict = field(init=False, repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        if self.rydberg_constant_hz <= 0:
            raise ConfigurationError("rydberg_constant_Hz must be positive")
        if self.core_radius_a0 <= 0:
            raise ConfigurationError("core_radius_a0 must be positive")
        object.__setattr__(
            self, "_lookup", {(l, j2): (d0, d2) for l, j2, d0, d2 in self.series}
        )

    def defect(self, n: int, l: int, j: float) -> float:
        try:
            d0, d2 = self._lookup[(l, round(2 * j))]
        except KeyError:
            letter = L_LETTERS[l] if l < len(L_LETTERS) else f"l={l}"
            raise ConfigurationError(
                f"no quantum-defect series {letter}{round(2*j)}/2 in table "
                f"{self.species or '(unnamed)'}"
            ) from None
        return d0 + d2 / (n - d0) ** 2

    def has_series(self, l: int, j: float) -> bool:
        return (l, round(2 * j)) in self._lookup

    def effective_n(self, state: RydbergState) -> float:
        nu = state.n - self.defect(state.n, state.l, state.j)
        if nu <= 0:
            raise ConfigurationError(f"effective n <= 0 for {state.label}")
        return nu

    @classmethod
    def load(cls, path) -> "QuantumDefectTable":
        """Parse the documented key/value table format (see data/rb85_quantum_defects.cfg)."""
        path = Path(path)
        series = []
        ry = None
        core = 0.05
        species = ""
        for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key == "rydberg_constant_Hz":
                ry = float(value)
            elif key == "core_radius_a0":
                core = float(value)
            elif key == "species":
                species = value
            else:
                m = _parse_series_key(key)
                if m is None:
                    raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
                parts = value.split()
                if len(parts) != 2:
                    raise ConfigurationError(
                        f"{path}:{lineno}: series needs two values (delta0 delta2)"
                    )
                series.append((m[0], m[1], float(parts[0]), float(parts[1])))
        if ry is None:
            raise ConfigurationError(f"{path}: missing rydberg_constant_Hz")
        return cls(tuple(series), ry, core, species)

    @classmethod
    def hydrogen(cls, l_max: int = 4) -> "QuantumDefectTable":
        """Defect-free table with the infinite-mass Rydberg constant (tests)."""
        series = []
        for l in range(l_max + 1):
            for j2 in ({1} if l == 0 else {2 * l - 1, 2 * l + 1}):
                series.append((l, j2, 0.0, 0.0))
        return cls(tuple(sorted(series)), RYD_INF_HZ, core_radius_a0=1e-3, species="H")


def _parse_series_key(key: str):
    # e.g. "P3/2" -> (1, 3)
    if len(key) < 4 or not key.endswith("/2"):
        return None
    letter, num = key[0], key[1:-2]
    if letter.upper() not in L_LETTERS or not num.isdigit():
        return None
    return (L_LETTERS.index(letter.upper()), int(num))


class Perturber(NamedTuple):
    state: RydbergState
    frequency_hz: float
    dipole_ea0: float


@dataclass(frozen=True)
class DipoleMatrixElement:
    """Radial integral (a0), aggregated angular factor, and their product (e a0)."""

    radial_a0: float
    angular: float

    @property
    def total_ea0(self) -> float:
        return self.radial_a0 * self.angular


def level_energy(state: RydbergState, defects: QuantumDefectTable) -> float:
    """Level energy in Hz relative to the ionization limit (negative)."""
    nu = defects.effective_n(state)
    return -defects.rydberg_constant_hz / nu**2


def transition_frequency(
    i: RydbergState, f: RydbergState, defects: QuantumDefectTable
) -> float:
    """Signed transition frequency nu_fi = (E_f - E_i)/h in Hz."""
    return level_energy(f, defects) - level_energy(i, defects)


# -- radial wavefunctions ----------------------------------------------------

_wavefunction_cache: dict = {}
_cache_lock = threading.Lock()
_CACHE_ENABLED = True


def set_matrix_element_cache(enabled: bool) -> None:
    """Toggle the radial-wavefunction memo cache (results never change)."""
    global _CACHE_ENABLED
    _CACHE_ENABLED = enabled
    if not enabled:
        with _cache_lock:
            _wavefunction_cache.clear()


def _radial_wavefunction(
    state: RydbergState,
    defects: QuantumDefectTable,
    grid_step: float,
    use_numba: bool | None,
):
    """Normalized y(x) on the sqrt(r) grid, with (x0, h, y) returned."""
    key = (state.n, state.l, round(2 * state.j), defects, grid_step)
    if _CACHE_ENABLED:
        hit = _wavefunction_cache.get(key)
        if hit is not None:
            return hit

    nu = defects.effective_n(state)
    e_au = -0.5 / nu**2
    c_ang = 4.0 * state.l * (state.l + 1) + 0.75
    # outer turning point of the Coulomb + centrifugal potential, doubled;
    # floored for low n where the tail decays slowly past the turning point
    arg = 1.0 - state.l * (state.l + 1) / nu**2
    r_turn = nu**2 * (1.0 + math.sqrt(max(arg, 0.0)))
    r_out = max(2.0 * r_turn, 2.0 * state.n * (state.n + 15.0))
    # the core-radius cutoff keeps the irregular Coulomb solution's blow-up
    # region (r well below the inner turning point) out of the domain
    x0 = math.sqrt(defects.core_radius_a0)
    n_pts = int(math.ceil((math.sqrt(r_out) - x0) / grid_step)) + 1
    y = numerov_inward(e_au, c_ang, x0, grid_step, n_pts, use_numba=use_numba)

    x = x0 + grid_step * np.arange(n_pts)
    norm = math.sqrt(2.0 * np.trapezoid(y * y * x * x, dx=grid_step))
    y = y / norm
    result = (x0, grid_step, y)
    if _CACHE_ENABLED:
        with _cache_lock:
            _wavefunction_cache[key] = result
    return result


def radial_matrix_element(
    i: RydbergState,
    f: RydbergState,
    defects: QuantumDefectTable,
    grid_step: float = 0.01,
    use_numba: bool | None = None,
) -> float:
    """Radial integral <f| r |i> in units of a0 (positive magnitude).

    Numerov quantum-defect wavefunctions on a shared sqrt(r) grid; symmetric
    in its arguments; requires the dipole selection rule |l_i - l_f| = 1.
    """
    if abs(i.l - f.l) != 1:
        raise SelectionRuleError(
            f"radial matrix element needs delta-l = +-1, got {i.label} -> {f.label}"
        )
    x0a, h, ya = _radial_wavefunction(i, defects, grid_step, use_numba)
    x0b, _, yb = _radial_wavefunction(f, defects, grid_step, use_numba)
    assert x0a == x0b
    m = min(ya.size, yb.size)
    x = x0a + h * np.arange(m)
    return abs(2.0 * np.trapezoid(ya[:m] * yb[:m] * x**4, dx=h))


def dipole_moment(
    i: RydbergState,
    f: RydbergState,
    defects: QuantumDefectTable,
    q: int = 0,
    grid_step: float = 0.01,
    use_numba: bool | None = None,
) -> DipoleMatrixElement:
    """|n.<f|r|i>| in e a0 for polarization component q (0 = linear along z).

    If i.m_j is set the factor is evaluated for that sublevel; otherwise the
    rms over the initial m_j manifold is used (for q = 0 all |m_j| give the
    same magnitude, so the rms equals the per-sublevel value).
    """
    if abs(i.l - f.l) != 1 or abs(i.j - f.j) > 1.001:
        raise SelectionRuleError(f"dipole-forbidden pair {i.label} -> {f.label}")
    if i.m_j is not None:
        m_list = [i.m_j]
    else:
        m_list = [m / 2.0 for m in range(-round(2 * i.j), round(2 * i.j) + 1, 2)]
    acc = 0.0
    for m in m_list:
        a = dipole_angular_factor(i.l, i.j, m, f.l, f.j, m + q, q)
        acc += a * a
    angular = math.sqrt(acc / len(m_list))
    if angular == 0.0:
        raise SelectionRuleError(f"vanishing angular factor for {i.label} -> {f.label} (q={q})")
    radial = radial_matrix_element(i, f, defects, grid_step, use_numba)
    return DipoleMatrixElement(radial_a0=radial, angular=angular)


def enumerate_perturbers(
    state: RydbergState,
    n_window: int,
    defects: QuantumDefectTable,
    exclude: RydbergState | None = None,
    q: int = 0,
    grid_step: float = 0.01,
    use_numba: bool | None = None,
) -> list[Perturber]:
    """All dipole-allowed |f> with n within state.n +- n_window, sorted by |nu_fi|.

    ``exclude`` drops the coherently driven partner level (matched on n, l, j).
    Series absent from the defect table are skipped only if they would sit
    above the table's highest-l series; otherwise the lookup error propagates.
    """
    if n_window < 0:
        raise ConfigurationError("n_window must be >= 0")
    out: list[Perturber] = []
    for l_f in (state.l - 1, state.l + 1):
        if l_f < 0:
            continue
        j_values = {l_f + 0.5} if l_f == 0 else {l_f - 0.5, l_f + 0.5}
        for j_f in sorted(j_values):
            if abs(state.j - j_f) > 1.001:
                continue
            for n_f in range(max(l_f + 1, state.n - n_window), state.n + n_window + 1):
                cand = RydbergState(n_f, l_f, j_f)
                if cand.same_level(state):
                    continue
                if exclude is not None and cand.same_level(exclude):
                    continue
                dip = dipole_moment(state, cand, defects, q, grid_step, use_numba)
                nu_fi = transition_frequency(state, cand, defects)
                out.append(Perturber(cand, nu_fi, dip.total_ea0))
    out.sort(key=lambda p: abs(p.frequency_hz))
    return out


__all__ = [
    "DipoleMatrixElement",
    "Perturber",
    "QuantumDefectTable",
    "RydbergState",
    "dipole_moment",
    "enumerate_perturbers",
    "level_energy",
    "radial_matrix_element",
    "set_matrix_element_cache",
    "transition_frequency",
]
