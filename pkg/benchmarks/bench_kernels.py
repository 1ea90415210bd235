"""Time the Dicke-ladder RK4 kernel: numba vs pure numpy.

    python3 benchmarks/bench_kernels.py [--sizes 20 80 160 320] [--steps 200]

Two starts per size: a tipped state fills every band, so the numba loop
does the full O(D^2) work; the fully excited state is diagonal and stays
so, and the numba loop skips the empty bands. Both back ends must agree
to 1e-12.
"""
import argparse
import time

import numpy as np

from nanosr import _kernels
from nanosr.dicke import DickeBasis


def _state(n, kind):
    b = DickeBasis(n)
    psi = b.coherent(np.pi / 2) if kind == "tipped" else b.excited()
    lo = b.lowering_coefficients()
    up = np.r_[0.0, lo[:-1]]
    return np.outer(psi, psi.conj()), lo, up


def _best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 80, 160, 320])
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels.ladder_rk4_numba is None:
        raise SystemExit("numba is not installed")

    gamma, pump = 1.0, 0.2
    # compile outside the timed region
    rho, lo, up = _state(2, "tipped")
    _kernels.ladder_rk4_numba(rho, lo, up, gamma, pump, 1e-4, 1)

    print(f"{'start':>8} {'N':>6} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8} {'max |diff|':>11}")
    for kind, n in [(k, n) for k in ("tipped", "excited") for n in args.sizes]:
        rho, lo, up = _state(n, kind)
        band = _kernels.bandwidth(rho)
        dt = 0.01 / (gamma * n)
        t_np, a = _best_of(lambda: _kernels.ladder_rk4_numpy(rho.copy(), lo, up, gamma, pump, dt, args.steps),
                           args.repeats)
        work = np.empty((5,) + rho.shape, dtype=complex)
        t_nb, b = _best_of(lambda: _kernels.ladder_rk4_numba(rho.copy(), lo, up, gamma, pump, dt, args.steps,
                                                             bandwidth=band, work=work), args.repeats)
        diff = float(np.max(np.abs(a - b)))
        print(f"{kind:>8} {n:>6} {t_np:>11.4f} {t_nb:>11.4f} {t_np / t_nb:>8.2f} {diff:>11.1e}")
        if diff > 1e-12:
            raise SystemExit(f"back ends disagree at N={n}: {diff:.2e}")


if __name__ == "__main__":
    main()
