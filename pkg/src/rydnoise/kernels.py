"""Hot numerical kernels with a numba path and a pure-Python/numpy fallback.

The two inner loops that dominate runtime live here:

* inward Numerov integration of the radial Schroedinger equation on a
  sqrt(r) grid (three-term recurrence, cannot be vectorized), and
* the steady-state solves of the reduced 18-coordinate master equation
  over a (scan detuning x velocity class) grid.

Path selection: the environment variable ``RYDNOISE_NUMBA=0`` forces the
fallback; callers may also pass ``use_numba`` explicitly. Both paths agree
to ~1e-13 (enforced by tests); velocity sums use compensated summation so
results are independent of thread count. ``benchmarks/bench_kernels.py``
compares the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import warnings

    from numba import NumbaWarning, njit, prange

    # the TBB-version notice is irrelevant; numba falls back to omp/workqueue
    warnings.filterwarnings("ignore", message=".*TBB.*", category=NumbaWarning)

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(fn):
            return fn

        return wrap

    prange = range  # type: ignore


def numba_enabled(override: bool | None = None) -> bool:
    """Resolve the kernel path: explicit override, else env flag, else numba."""
    if override is not None:
        return bool(override) and _HAVE_NUMBA
    return _HAVE_NUMBA and os.environ.get("RYDNOISE_NUMBA", "1") != "0"


# ---------------------------------------------------------------------------
# Numerov radial integration
#
# Radial equation u'' = [l(l+1)/r^2 - 2(E + 1/r)] u (atomic units, Coulomb
# potential, mu = 1) transformed with x = sqrt(r), y = u / r^(1/4), giving
# y'' = -k(x) y with k(x) = 8 E x^2 + 8 - (4 l(l+1) + 3/4) / x^2.
# Integration runs inward from the outer classically forbidden region.
# ---------------------------------------------------------------------------


def _numerov_inward_py(e_au: float, c_ang: float, x0: float, h: float, n: int) -> np.ndarray:
    y = np.zeros(n)
    y[n - 1] = 1e-10
    y[n - 2] = 1.1e-10
    h12 = h * h / 12.0
    x = x0 + (n - 3) * h
    for i in range(n - 3, -1, -1):
        km = 8.0 * e_au * x * x + 8.0 - c_ang / (x * x)
        xp = x + h
        k0 = 8.0 * e_au * xp * xp + 8.0 - c_ang / (xp * xp)
        xq = x + 2.0 * h
        kp = 8.0 * e_au * xq * xq + 8.0 - c_ang / (xq * xq)
        y[i] = (2.0 * (1.0 - 5.0 * h12 * k0) * y[i + 1] - (1.0 + h12 * kp) * y[i + 2]) / (
            1.0 + h12 * km
        )
        x -= h
    return y


@njit(cache=True)
def _numerov_inward_nb(e_au: float, c_ang: float, x0: float, h: float, n: int) -> np.ndarray:
    y = np.zeros(n)
    y[n - 1] = 1e-10
    y[n - 2] = 1.1e-10
    h12 = h * h / 12.0
    x = x0 + (n - 3) * h
    for i in range(n - 3, -1, -1):
        km = 8.0 * e_au * x * x + 8.0 - c_ang / (x * x)
        xp = x + h
        k0 = 8.0 * e_au * xp * xp + 8.0 - c_ang / (xp * xp)
        xq = x + 2.0 * h
        kp = 8.0 * e_au * xq * xq + 8.0 - c_ang / (xq * xq)
        y[i] = (2.0 * (1.0 - 5.0 * h12 * k0) * y[i + 1] - (1.0 + h12 * kp) * y[i + 2]) / (
            1.0 + h12 * km
        )
        x -= h
    return y


def numerov_inward(
    e_au: float, c_ang: float, x0: float, h: float, n: int, use_numba: bool | None = None
) -> np.ndarray:
    """Integrate y'' = -k(x) y inward on x0 + i*h, i = 0..n-1; returns y."""
    if numba_enabled(use_numba):
        return _numerov_inward_nb(e_au, c_ang, x0, h, n)
    return _numerov_inward_py(e_au, c_ang, x0, h, n)


# ---------------------------------------------------------------------------
# Steady-state solves on the reduced 18-coordinate space
#
# l0t: reduced Liouvillian with the trace row already substituted at row 0
# (rhs is e0). cs/cv: per-coordinate diagonal coefficients of the scan
# detuning and the velocity, i.e. the -i(h_i - h_j) updates relative to the
# scan=0, v=0 Hamiltonian baked into l0t. out_idx selects the returned
# coherence (rho_21 for the probe susceptibility).
# ---------------------------------------------------------------------------


def _steady_grid_py(l0t, cs, cv, scan, v, w, out_idx):
    nc = l0t.shape[0]
    nv = v.shape[0]
    rhs = np.zeros(nc, complex)
    rhs[0] = 1.0
    rhs_b = np.broadcast_to(rhs, (nv, nc))
    diag = np.arange(nc)
    out = np.empty(scan.shape[0], complex)
    for a in range(scan.shape[0]):
        mats = np.repeat(l0t[None, :, :], nv, axis=0)
        mats[:, diag, diag] += -1j * (cs[None, :] * scan[a] + cv[None, :] * v[:, None])
        sol = np.linalg.solve(mats, rhs_b[..., None])[..., 0]
        vals = w * sol[:, out_idx]
        out[a] = complex(math.fsum(vals.real), math.fsum(vals.imag))
    return out


@njit(cache=True, parallel=True)
def _steady_grid_nb(l0t, cs, cv, scan, v, w, out_idx):
    ns = scan.shape[0]
    nv = v.shape[0]
    nc = l0t.shape[0]
    out = np.empty(ns, np.complex128)
    for a in prange(ns):
        rhs = np.zeros(nc, np.complex128)
        rhs[0] = 1.0
        mat = np.empty((nc, nc), np.complex128)
        acc_r = 0.0
        acc_i = 0.0
        comp_r = 0.0
        comp_i = 0.0
        for b in range(nv):
            mat[:, :] = l0t
            for k in range(nc):
                mat[k, k] += -1j * (cs[k] * scan[a] + cv[k] * v[b])
            sol = np.linalg.solve(mat, rhs.copy())
            val = w[b] * sol[out_idx]
            yr = val.real - comp_r
            tr = acc_r + yr
            comp_r = (tr - acc_r) - yr
            acc_r = tr
            yi = val.imag - comp_i
            ti = acc_i + yi
            comp_i = (ti - acc_i) - yi
            acc_i = ti
        out[a] = complex(acc_r, acc_i)
    return out


def steady_coherence_grid(
    l0t: np.ndarray,
    cs: np.ndarray,
    cv: np.ndarray,
    scan: np.ndarray,
    v: np.ndarray,
    weights: np.ndarray,
    out_idx: int,
    use_numba: bool | None = None,
) -> np.ndarray:
    """Velocity-averaged steady-state coherence for every scan detuning.

    Returns sum_b weights[b] * rho[out_idx](scan[a], v[b]) as a complex array
    over the scan grid. Row 0 of l0t must already hold the trace constraint.
    """
    l0t = np.ascontiguousarray(l0t, dtype=np.complex128)
    cs = np.ascontiguousarray(cs, dtype=np.float64)
    cv = np.ascontiguousarray(cv, dtype=np.float64)
    scan = np.ascontiguousarray(scan, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if numba_enabled(use_numba):
        return _steady_grid_nb(l0t, cs, cv, scan, v, weights, out_idx)
    return _steady_grid_py(l0t, cs, cv, scan, v, weights, out_idx)


def set_num_threads(n: int) -> None:
    """Limit numba's thread pool (clamped to the machine; no-op on the fallback path)."""
    if _HAVE_NUMBA and n > 0:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


__all__ = ["numba_enabled", "numerov_inward", "set_num_threads", "steady_coherence_grid"]
