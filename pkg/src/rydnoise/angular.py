"""Angular-momentum algebra: Wigner 3-j / 6-j symbols and dipole angular factors.

Racah's closed forms with plain floats; exact enough (1e-12) for the small
angular momenta (j <= 9/2) that appear in dipole couplings here.
"""

from __future__ import annotations

import math
from functools import lru_cache


def _is_half_int(x: float) -> bool:
    return abs(2 * x - round(2 * x)) < 1e-9


def _triangle_ok(a: float, b: float, c: float) -> bool:
    return (abs(a - b) <= c <= a + b) and _is_half_int(a + b + c)


@lru_cache(maxsize=None)
def _fact(n: int) -> float:
    return float(math.factorial(n))


def _delta(a: float, b: float, c: float) -> float:
    """Triangle coefficient sqrt(Δ(abc)) used by the Racah formulas."""
    return math.sqrt(
        _fact(round(a + b - c)) * _fact(round(a - b + c)) * _fact(round(-a + b + c))
        / _fact(round(a + b + c + 1))
    )


def wigner_3j(j1: float, j2: float, j3: float, m1: float, m2: float, m3: float) -> float:
    """Wigner 3-j symbol (j1 j2 j3; m1 m2 m3)."""
    if abs(m1 + m2 + m3) > 1e-9:
        return 0.0
    if not _triangle_ok(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if not (_is_half_int(j1 - m1) and _is_half_int(j2 - m2) and _is_half_int(j3 - m3)):
        return 0.0

    t_min = max(0, round(j2 - j3 - m1), round(j1 - j3 + m2))
    t_max = min(round(j1 + j2 - j3), round(j1 - m1), round(j2 + m2))
    if t_min > t_max:
        return 0.0
    total = 0.0
    for t in range(t_min, t_max + 1):
        denom = (
            _fact(t)
            * _fact(round(j3 - j2 + m1) + t)
            * _fact(round(j3 - j1 - m2) + t)
            * _fact(round(j1 + j2 - j3) - t)
            * _fact(round(j1 - m1) - t)
            * _fact(round(j2 + m2) - t)
        )
        total += (-1.0) ** t / denom
    norm = _delta(j1, j2, j3) * math.sqrt(
        _fact(round(j1 + m1)) * _fact(round(j1 - m1))
        * _fact(round(j2 + m2)) * _fact(round(j2 - m2))
        * _fact(round(j3 + m3)) * _fact(round(j3 - m3))
    )
    return (-1.0) ** round(j1 - j2 - m3) * norm * total


def wigner_6j(j1: float, j2: float, j3: float, j4: float, j5: float, j6: float) -> float:
    """Wigner 6-j symbol {j1 j2 j3; j4 j5 j6}."""
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    for a, b, c in triads:
        if not _triangle_ok(a, b, c):
            return 0.0
    norm = 1.0
    for a, b, c in triads:
        norm *= _delta(a, b, c)

    args = [
        round(j1 + j2 + j3),
        round(j1 + j5 + j6),
        round(j4 + j2 + j6),
        round(j4 + j5 + j3),
    ]
    sums = [
        round(j1 + j2 + j4 + j5),
        round(j2 + j3 + j5 + j6),
        round(j3 + j1 + j6 + j4),
    ]
    t_min = max(args)
    t_max = min(sums)
    if t_min > t_max:
        return 0.0
    total = 0.0
    for t in range(t_min, t_max + 1):
        denom = 1.0
        for a in args:
            denom *= _fact(t - a)
        for s in sums:
            denom *= _fact(s - t)
        total += (-1.0) ** t * _fact(t + 1) / denom
    return norm * total


def reduced_c1(l_i: int, l_f: int) -> float:
    """Reduced matrix element <l_f || C^(1) || l_i> of the rank-1 spherical tensor."""
    return (
        (-1.0) ** l_f
        * math.sqrt((2 * l_f + 1) * (2 * l_i + 1))
        * wigner_3j(l_f, 1, l_i, 0.0, 0.0, 0.0)
    )


def dipole_angular_factor(
    l_i: int, j_i: float, m_i: float, l_f: int, j_f: float, m_f: float, q: int = 0
) -> float:
    """Angular part of <f|r_q|i> for spin-1/2 fine-structure states.

    Defined so that <n_f l_f j_f m_f| r_q |n_i l_i j_i m_i> equals this factor
    times the radial integral; q=0 is linear polarization along the
    quantization axis.
    """
    s = 0.5
    reduced_j = (
        (-1.0) ** (l_f + s + j_i + 1)
        * math.sqrt((2 * j_f + 1) * (2 * j_i + 1))
        * wigner_6j(l_f, j_f, s, j_i, l_i, 1.0)
        * reduced_c1(l_i, l_f)
    )
    return (-1.0) ** round(j_f - m_f) * wigner_3j(j_f, 1, j_i, -m_f, q, m_i) * reduced_j


__all__ = ["dipole_angular_factor", "reduced_c1", "wigner_3j", "wigner_6j"]
