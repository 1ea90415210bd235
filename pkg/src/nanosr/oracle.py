"""Full 2^N Hilbert-space reference for small ensembles (N <= 6).

Operators are assembled site by site from 2x2 spin matrices, independently of
the Dicke-ladder construction, and evolved with the dense integrator. This is
also the only place where per-molecule (symmetry-breaking) channels exist.

Site basis: index 0 = excited, 1 = ground, matching the N = 1 Dicke ladder.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import combinations
import math

import numpy as np

from .dicke import ModelParams
from .dynamics import LindbladModel, Trajectory, evolve_master
from .units import HBAR

MAX_ORACLE_MOLECULES = 6

SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])
SIGMA_MINUS = SIGMA_PLUS.T
SPIN_Z = np.diag([0.5, -0.5])


@dataclass(frozen=True)
class FullSpaceOperators:
    n_molecules: int
    site_plus: tuple
    site_minus: tuple
    site_z: tuple
    j_plus: np.ndarray
    j_minus: np.ndarray
    j_z: np.ndarray

    @property
    def dimension(self) -> int:
        return 2**self.n_molecules


def _check_n(n):
    if int(n) != n or not 1 <= n <= MAX_ORACLE_MOLECULES:
        raise ValueError(f"oracle supports 1 <= N <= {MAX_ORACLE_MOLECULES}, got {n!r}")


def _site_operator(op, site, n):
    factors = [np.eye(2)] * n
    factors[site] = op
    return reduce(np.kron, factors)


def build_full_operators(n_molecules: int) -> FullSpaceOperators:
    _check_n(n_molecules)
    n = n_molecules
    plus = tuple(_site_operator(SIGMA_PLUS, i, n) for i in range(n))
    minus = tuple(_site_operator(SIGMA_MINUS, i, n) for i in range(n))
    z = tuple(_site_operator(SPIN_Z, i, n) for i in range(n))
    return FullSpaceOperators(n, plus, minus, z, sum(plus), sum(minus), sum(z))


def symmetric_isometry(n_molecules: int) -> np.ndarray:
    """Columns are the Dicke states |j, j-k> as equal-weight sums over bit strings.

    Column k has N - k excited sites; built by enumeration, not by ladder operators.
    """
    _check_n(n_molecules)
    n = n_molecules
    v = np.zeros((2**n, n + 1))
    for k in range(n + 1):
        n_ground = k
        for ground_sites in combinations(range(n), n_ground):
            index = sum(1 << (n - 1 - s) for s in ground_sites)
            v[index, k] = 1.0
        v[:, k] /= math.sqrt(math.comb(n, n_ground))
    return v


def product_state(n_molecules: int, excited: bool = True) -> np.ndarray:
    _check_n(n_molecules)
    psi = np.zeros(2**n_molecules, dtype=complex)
    psi[0 if excited else -1] = 1.0
    return psi


def lift_symmetric(dicke_state, n_molecules: int) -> np.ndarray:
    """Embed a Dicke-ladder vector or density matrix into the full space."""
    v = symmetric_isometry(n_molecules)
    s = np.asarray(dicke_state)
    if s.ndim == 1:
        return v @ s
    return v @ s @ v.T


def project_symmetric(full_state, n_molecules: int):
    """Component on the maximal-j multiplet and the weight left outside it.

    For a vector the leakage is the norm of the orthogonal remainder; for a
    density matrix it is the population outside the multiplet.
    """
    v = symmetric_isometry(n_molecules)
    s = np.asarray(full_state)
    if s.ndim == 1:
        inside = v.T @ s
        leak = float(np.linalg.norm(s - v @ inside))
        return inside, leak
    inside = v.T @ s @ v
    leak = float(abs(np.trace(s) - np.trace(inside)))
    return inside, leak


def full_model(params: ModelParams, n_molecules: int, per_molecule_pump: bool = False,
               ops: FullSpaceOperators | None = None) -> LindbladModel:
    """Full-space Lindblad model; H is the spin splitting in the frame of the mode."""
    ops = ops or build_full_operators(n_molecules)
    h = HBAR * params.detuning * ops.j_z.astype(complex)
    channels = [(ops.j_minus, params.gamma_collective), (ops.j_z, params.gamma_dephasing)]
    if per_molecule_pump:
        channels += [(sp, params.pump_rate / n_molecules) for sp in ops.site_plus]
    else:
        channels.append((ops.j_plus, params.pump_rate))
    return LindbladModel(h, tuple(channels))


def evolve_full_master(n_molecules: int, params: ModelParams, rho0_full, t_grid,
                       per_molecule_pump: bool = False, max_step=None,
                       store_states=False) -> Trajectory:
    """Master-equation run in the full space with the same observables as the ladder path."""
    ops = build_full_operators(n_molecules)
    model = full_model(params, n_molecules, per_molecule_pump, ops)
    e_ops = {
        "jpjm": ops.j_plus @ ops.j_minus,
        "jmjp": ops.j_minus @ ops.j_plus,
        "jz": ops.j_z,
        "jp": ops.j_plus,
    }
    if per_molecule_pump:
        # absorbed flux: sum_j (w/N) <s-_j s+_j>
        e_ops["jmjp"] = sum(sm @ sp for sm, sp in zip(ops.site_minus, ops.site_plus)) / n_molecules
    return evolve_master(model, rho0_full, t_grid, e_ops=e_ops, max_step=max_step, store_states=store_states)


def initial_full_state(n_molecules: int, kind: str, theta: float | None = None) -> np.ndarray:
    """Full-space density matrix for the same initial states as the ladder engine."""
    if kind == "tipped":
        if theta is None:
            theta = 2.0 / math.sqrt(n_molecules)
        # product of identical single-site states is the spin coherent state
        site = np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=complex)
        psi = reduce(np.kron, [site] * n_molecules)
    elif kind == "fully_excited":
        psi = product_state(n_molecules, True)
    elif kind == "ground":
        psi = product_state(n_molecules, False)
    else:
        raise ValueError(f"unknown initial state {kind!r}")
    return np.outer(psi, psi.conj())
