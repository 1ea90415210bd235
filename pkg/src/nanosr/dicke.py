"""Collective spin algebra on the symmetric (Dicke) ladder and the cavity Hamiltonian.

Basis ordering: index k <-> m = j - k, so index 0 is the fully excited state
|j, j> and index N is the ground state |j, -j>. Photon-number states follow
the spin index in the product space (kron(spin, fock)).

The molecule positions drop out: at 200 cm^-1 the transition wavelength is
50 um, so every e^{ik.r} phase across a <= 25 nm cavity is 1 and the
per-mode collective operators reduce to J+, J-.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from . import units

MAX_MOLECULES = 4096
MAX_HAMILTONIAN_DIM = 20_000


class CapacityError(ValueError):
    """Requested system does not fit the configured size limits."""


@dataclass(frozen=True)
class DickeBasis:
    n_molecules: int

    def __post_init__(self):
        if int(self.n_molecules) != self.n_molecules or self.n_molecules < 1:
            raise ValueError(f"n_molecules must be a positive integer, got {self.n_molecules!r}")

    @property
    def j(self) -> float:
        return self.n_molecules / 2

    @property
    def dimension(self) -> int:
        return self.n_molecules + 1

    @property
    def m_values(self) -> np.ndarray:
        return self.j - np.arange(self.dimension)

    def lowering_coefficients(self) -> np.ndarray:
        """a[k] = <k+1|J-|k>, with a[N] = 0 (length N+1)."""
        m = self.m_values
        a2 = self.j * (self.j + 1) - m * (m - 1)
        a2[-1] = 0.0
        return np.sqrt(np.clip(a2, 0.0, None))

    def state(self, m: float) -> np.ndarray:
        """Basis vector |j, m>."""
        k = self.j - m
        if abs(k - round(k)) > 1e-12 or not 0 <= round(k) <= self.n_molecules:
            raise ValueError(f"m={m} is not on the ladder of j={self.j}")
        v = np.zeros(self.dimension, dtype=complex)
        v[int(round(k))] = 1.0
        return v

    def excited(self) -> np.ndarray:
        return self.state(self.j)

    def ground(self) -> np.ndarray:
        return self.state(-self.j)

    def coherent(self, theta: float, phi: float = 0.0) -> np.ndarray:
        """Coherent spin state with Bloch vector at polar angle ``theta`` from the excited pole."""
        if not 0 <= theta <= math.pi:
            raise ValueError("theta must lie in [0, pi]")
        n = self.n_molecules
        k = np.arange(n + 1)
        # amplitude_k = sqrt(C(n, k)) cos(theta/2)^(n-k) sin(theta/2)^k e^{i k phi}, in logs
        ln_binom = np.array(
            [math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1) for i in k]
        )
        ln_c = math.log(math.cos(theta / 2)) if theta < math.pi else -math.inf
        ln_s = math.log(math.sin(theta / 2)) if theta > 0 else -math.inf
        with np.errstate(invalid="ignore"):
            ln_amp = (0.5 * ln_binom
                      + np.where(k == n, 0.0, (n - k) * ln_c)
                      + np.where(k == 0, 0.0, k * ln_s))
        psi = np.exp(ln_amp) * np.exp(1j * k * phi)
        return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class CollectiveOperators:
    j_plus: np.ndarray
    j_minus: np.ndarray
    j_z: np.ndarray

    @property
    def dimension(self) -> int:
        return self.j_z.shape[0]


def build_collective_operators(n_molecules: int, max_molecules: int = MAX_MOLECULES) -> CollectiveOperators:
    if n_molecules > max_molecules:
        raise CapacityError(f"N={n_molecules} exceeds the limit of {max_molecules}")
    basis = DickeBasis(n_molecules)
    a = basis.lowering_coefficients()
    # J+ |k> = a[k-1] |k-1>: superdiagonal
    j_plus = np.diag(a[:-1], k=1)
    return CollectiveOperators(j_plus=j_plus, j_minus=j_plus.T.copy(), j_z=np.diag(basis.m_values))


@dataclass(frozen=True)
class ModelParams:
    """Spin-field model parameters, SI throughout.

    ``coupling`` overrides the vacuum-field value derived from dipole,
    mode frequency and volume when given.
    """

    epsilon: float
    dipole: float
    mode_frequency: float
    mode_volume: float
    coupling: float | None = None
    gamma_collective: float = 0.0
    gamma_dephasing: float = 0.0
    pump_rate: float = 0.0

    def __post_init__(self):
        for name in ("epsilon", "dipole", "mode_frequency", "gamma_collective",
                     "gamma_dephasing", "pump_rate"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.mode_volume > 0:
            raise ValueError("mode_volume must be > 0")
        if self.coupling is not None and not self.coupling >= 0:
            raise ValueError("coupling must be >= 0")

    @classmethod
    def from_lab_units(cls, epsilon_wavenumber=200.0, dipole_displacement=0.2,
                       mode_volume=1e-27, mode_frequency=None, **rates) -> "ModelParams":
        eps = units.wavenumber_to_angular_frequency(epsilon_wavenumber)
        return cls(
            epsilon=eps,
            dipole=units.dipole_moment_from_displacement(dipole_displacement),
            mode_frequency=eps if mode_frequency is None else mode_frequency,
            mode_volume=mode_volume,
            **rates,
        )

    @property
    def detuning(self) -> float:
        return self.epsilon - self.mode_frequency

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class FieldMode:
    fock_cutoff: int
    frequency: float

    def __post_init__(self):
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise ValueError("fock_cutoff must be an integer >= 1")

    @property
    def dimension(self) -> int:
        return self.fock_cutoff + 1

    def annihilation(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.dimension, dtype=float)), k=1)

    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dimension, dtype=float))


def coupling_constant(params: ModelParams) -> float:
    """Single-molecule vacuum Rabi coupling g (rad/s)."""
    if params.coupling is not None:
        return params.coupling
    if not params.mode_frequency > 0:
        raise ValueError("mode_frequency must be > 0")
    field = math.sqrt(units.HBAR * params.mode_frequency / (2 * units.EPS0 * params.mode_volume))
    return params.dipole / units.HBAR * field


def build_hamiltonian(params: ModelParams, basis: DickeBasis, mode: FieldMode,
                      counter_rotating: bool = False) -> np.ndarray:
    """Tavis-Cummings Hamiltonian (J) on the spin x Fock product space.

    H = hbar w a^dag a + hbar eps J_z + hbar g (a^dag J- + a J+);
    ``counter_rotating`` adds hbar g (a J- + a^dag J+).
    """
    dim = basis.dimension * mode.dimension
    if dim > MAX_HAMILTONIAN_DIM:
        raise CapacityError(f"Hamiltonian dimension {dim} exceeds {MAX_HAMILTONIAN_DIM}")
    ops = build_collective_operators(basis.n_molecules)
    g = coupling_constant(params)
    a = mode.annihilation()
    i_s = np.eye(basis.dimension)
    i_f = np.eye(mode.dimension)
    h = mode.frequency * np.kron(i_s, mode.number()) + params.epsilon * np.kron(ops.j_z, i_f)
    h = h + g * (np.kron(ops.j_minus, a.T) + np.kron(ops.j_plus, a))
    if counter_rotating:
        h = h + g * (np.kron(ops.j_minus, a) + np.kron(ops.j_plus, a.T))
    return units.HBAR * h.astype(complex)


def excitation_number(basis: DickeBasis, mode: FieldMode) -> np.ndarray:
    """Photon number + J_z + j on the product space."""
    jz = np.diag(basis.m_values + basis.j)
    return np.kron(jz, np.eye(mode.dimension)) + np.kron(np.eye(basis.dimension), mode.number())


def lift_spin_operator(op: np.ndarray, mode: FieldMode) -> np.ndarray:
    return np.kron(op, np.eye(mode.dimension))
