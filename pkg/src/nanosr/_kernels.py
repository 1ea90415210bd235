"""Inner loops for the collective (Dicke-ladder) master equation.

Both back ends advance rho under the jump part of the collective Lindbladian,

    d rho/dt = gamma D[J-] rho + pump D[J+] rho,

written element-wise on the ladder (index k <-> m = j - k):

    out[p, q] = gamma * (up[p] up[q] rho[p-1, q-1] - (lo[p]^2 + lo[q]^2)/2 rho[p, q])
              + pump  * (lo[p] lo[q] rho[p+1, q+1] - (up[p]^2 + up[q]^2)/2 rho[p, q])

with lo[k] = <k+1|J-|k> and up[k] = <k-1|J+|k>. Cost is O(D^2) per call
instead of the O(D^3) of dense matrix products.

The jump terms never change p - q, so a state confined to the bands
|p - q| <= bandwidth stays there; the compiled kernel only visits those bands.

Set NANOSR_NO_NUMBA=1 to force the numpy implementation.
"""
import os

import numpy as np

_DISABLED = os.environ.get("NANOSR_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not _DISABLED


def ladder_rk4_numpy(rho, lo, up, gamma, pump, dt, nsteps, bandwidth=None, work=None):
    """Advance ``rho`` in place by ``nsteps`` RK4 steps of size ``dt``.

    ``bandwidth`` and ``work`` are accepted for signature parity and ignored:
    the dense update keeps empty bands at exactly zero anyway.
    """
    decay = gamma * lo**2 + pump * up**2
    diag_rate = -0.5 * (decay[:, None] + decay[None, :])
    down = gamma * np.outer(up[1:], up[1:])
    raise_ = pump * np.outer(lo[:-1], lo[:-1])

    def rhs(r):
        out = diag_rate * r
        out[1:, 1:] += down * r[:-1, :-1]
        out[:-1, :-1] += raise_ * r[1:, 1:]
        return out

    for _ in range(nsteps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


if numba is not None:

    @numba.njit(cache=True, fastmath=False)
    def _ladder_rhs(r, lo, up, gamma, pump, band, out):
        d = r.shape[0]
        for p in range(d):
            lp2 = lo[p] * lo[p]
            up2 = up[p] * up[p]
            for q in range(max(0, p - band), min(d, p + band + 1)):
                rate = 0.5 * (gamma * (lp2 + lo[q] * lo[q]) + pump * (up2 + up[q] * up[q]))
                val = -rate * r[p, q]
                if p > 0 and q > 0:
                    val += gamma * up[p] * up[q] * r[p - 1, q - 1]
                if p < d - 1 and q < d - 1:
                    val += pump * lo[p] * lo[q] * r[p + 1, q + 1]
                out[p, q] = val

    @numba.njit(cache=True, fastmath=False)
    def _ladder_rk4_numba(rho, lo, up, gamma, pump, dt, nsteps, band, work):
        d = rho.shape[0]
        k1 = work[0]
        k2 = work[1]
        k3 = work[2]
        k4 = work[3]
        tmp = work[4]
        half = 0.5 * dt
        for _ in range(nsteps):
            _ladder_rhs(rho, lo, up, gamma, pump, band, k1)
            for p in range(d):
                for q in range(max(0, p - band), min(d, p + band + 1)):
                    tmp[p, q] = rho[p, q] + half * k1[p, q]
            _ladder_rhs(tmp, lo, up, gamma, pump, band, k2)
            for p in range(d):
                for q in range(max(0, p - band), min(d, p + band + 1)):
                    tmp[p, q] = rho[p, q] + half * k2[p, q]
            _ladder_rhs(tmp, lo, up, gamma, pump, band, k3)
            for p in range(d):
                for q in range(max(0, p - band), min(d, p + band + 1)):
                    tmp[p, q] = rho[p, q] + dt * k3[p, q]
            _ladder_rhs(tmp, lo, up, gamma, pump, band, k4)
            for p in range(d):
                for q in range(max(0, p - band), min(d, p + band + 1)):
                    rho[p, q] += (dt / 6.0) * (k1[p, q] + 2.0 * k2[p, q] + 2.0 * k3[p, q] + k4[p, q])
        return rho

    def ladder_rk4_numba(rho, lo, up, gamma, pump, dt, nsteps, bandwidth=None, work=None):
        """Compiled twin of :func:`ladder_rk4_numpy`; ``work`` is optional (5, D, D) scratch space."""
        band = rho.shape[0] - 1 if bandwidth is None else int(bandwidth)
        if work is None:
            work = np.empty((5,) + rho.shape, dtype=rho.dtype)
        return _ladder_rk4_numba(rho, lo, up, float(gamma), float(pump), float(dt), int(nsteps), band, work)

else:  # pragma: no cover
    ladder_rk4_numba = None


ladder_rk4 = ladder_rk4_numba if USE_NUMBA else ladder_rk4_numpy


def bandwidth(rho) -> int:
    """Largest |p - q| with a nonzero entry."""
    p, q = np.nonzero(rho)
    if len(p) == 0:
        return 0
    return int(np.max(np.abs(p - q)))


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
