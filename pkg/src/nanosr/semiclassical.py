"""Mean-field superradiance for ensembles too large for the density matrix.

The collective Bloch vector has length N/2 and polar angle theta measured
from the fully excited pole; it rolls toward theta = pi as

    d theta/dt = (N gamma / 2) sin theta,    I = (N^2 gamma / 4) sin^2 theta,

whose solution is the sech^2 burst. A fully excited quantum ensemble maps to
theta_0 = 2/sqrt(N): vacuum fluctuations tip it off the unstable pole.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp

from .trace import EmissionTrace


@dataclass(frozen=True)
class SemiclassicalParams:
    n_molecules: int
    gamma: float
    initial_tipping_angle: float | None = None  # rad; None -> 2/sqrt(N)
    dephasing: float = 0.0  # collective gamma_phi, damps |<J+>| only

    def __post_init__(self):
        if self.n_molecules < 1:
            raise ValueError("n_molecules must be >= 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.dephasing >= 0:
            raise ValueError("dephasing must be >= 0")
        theta = self.theta0
        if not 0 <= theta <= math.pi:
            raise ValueError("initial_tipping_angle must lie in [0, pi]")

    @property
    def theta0(self) -> float:
        if self.initial_tipping_angle is None:
            return 2.0 / math.sqrt(self.n_molecules)
        return float(self.initial_tipping_angle)

    @property
    def collective_rate(self) -> float:
        return self.n_molecules * self.gamma

    @property
    def peak_intensity(self) -> float:
        return self.n_molecules**2 * self.gamma / 4

    @property
    def delay_time(self) -> float:
        """Time at which theta passes pi/2; ~ ln(N)/(N gamma) for the default angle."""
        half = self.theta0 / 2
        return 2.0 / self.collective_rate * math.log(math.cos(half) / math.sin(half))


def _trace(params, t, sin_theta, cos_theta):
    n = params.n_molecules
    coherence = 0.5 * n * sin_theta * np.exp(-0.5 * params.dephasing * (t - t[0]))
    return EmissionTrace(
        times=t,
        intensity=params.peak_intensity * sin_theta**2,
        inversion=0.5 * n * cos_theta,
        coherence=coherence,
        purity=np.ones(len(t)),
        trace_error=np.zeros(len(t)),
        n_molecules=n,
        engine="semiclassical",
    )


def sech2_pulse(params: SemiclassicalParams, t_grid) -> EmissionTrace:
    """Closed-form burst I = (N^2 gamma/4) sech^2(N gamma (t - t_D)/2)."""
    t = np.asarray(t_grid, dtype=float)
    x = 0.5 * params.collective_rate * (t - params.delay_time)
    sin_theta = 1.0 / np.cosh(x)
    cos_theta = -np.tanh(x)
    return _trace(params, t, sin_theta, cos_theta)


@dataclass
class BlochSolution:
    theta: np.ndarray
    trace: EmissionTrace


def bloch_ode(params: SemiclassicalParams, t_grid, rtol=1e-12, atol=1e-14) -> BlochSolution:
    """Numerical integration of the polar-angle equation from ``t_grid[0]``."""
    theta0 = params.theta0
    if theta0 == 0.0:
        raise ValueError("theta_0 = 0 is the unstable fixed point: no classical evolution starts")
    t = np.asarray(t_grid, dtype=float)
    if len(t) == 0:
        raise ValueError("empty time grid")
    rate = 0.5 * params.collective_rate
    if len(t) == 1:
        theta = np.array([theta0])
    else:
        sol = solve_ivp(
            lambda _, y: rate * np.sin(y),
            (t[0], t[-1]),
            [theta0],
            t_eval=t,
            method="DOP853",
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise RuntimeError(f"Bloch integration failed: {sol.message}")
        theta = sol.y[0]
    return BlochSolution(theta, _trace(params, t, np.sin(theta), np.cos(theta)))
