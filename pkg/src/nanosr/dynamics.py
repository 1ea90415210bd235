"""Closed and open time evolution of the collective spin (and cavity) system.

Open runs use the collective master equation

    d rho/dt = -i/hbar [H, rho] + gamma D[J-] + gamma_phi D[J_z] + w D[J+],

with D[L] rho = L rho L^dag - {L^dag L, rho}/2. The cavity field is
eliminated (bad-cavity limit), so the state lives on the (N+1)-dimensional
Dicke ladder.

On the ladder, H = hbar*Delta*J_z and D[J_z] only multiply rho[p, q] by a
function of m_p - m_q, and the jump terms of D[J-], D[J+] never change
m_p - m_q. The two parts therefore commute: the jump part is integrated by
RK4 (``_kernels``) and the phase/dephasing factor is applied exactly at each
output time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import _kernels
from .dicke import (
    MAX_MOLECULES,
    CapacityError,
    DickeBasis,
    FieldMode,
    ModelParams,
    build_collective_operators,
    build_hamiltonian,
    lift_spin_operator,
)
from .trace import EmissionTrace
from .units import HBAR

NORM_TOL = 1e-10
TRACE_TOL = 1e-8
HERMITIAN_TOL = 1e-8
POSITIVITY_TOL = 1e-8
#: Fraction of the collective time 1/(gamma N) used as the default RK4 step.
STEP_FRACTION = 0.01
#: Dense path: step as a fraction of 1/||generator||.
DENSE_STEP_FRACTION = 0.02
MAX_REFINEMENTS = 6


class InvariantViolation(RuntimeError):
    """A state left the physical set (norm, trace, hermiticity, positivity) beyond tolerance."""

    def __init__(self, message, time=None, step=None, worst=None):
        super().__init__(message)
        self.time = time
        self.step = step
        self.worst = worst


@dataclass
class Trajectory:
    times: np.ndarray
    expect: dict
    purity: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray  # NaN where positivity was not checked
    final: np.ndarray
    states: np.ndarray | None = None
    dt: float = math.nan
    steps: int = 0


@dataclass(frozen=True)
class LindbladModel:
    """Dense master-equation model: H in joules, channels as (operator, rate)."""

    hamiltonian: np.ndarray
    channels: tuple = ()

    def __post_init__(self):
        h = np.asarray(self.hamiltonian)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("hamiltonian must be square")
        for op, rate in self.channels:
            if np.shape(op) != h.shape:
                raise ValueError(f"channel operator shape {np.shape(op)} != hamiltonian shape {h.shape}")
            if not rate >= 0:
                raise ValueError("channel rates must be >= 0")

    @property
    def dimension(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class CollectiveLindblad:
    """Collective decay (J-), dephasing (J_z) and pumping (J+) on the Dicke ladder.

    ``detuning`` is the spin splitting in the frame rotating at the mode
    frequency (rad/s).
    """

    n_molecules: int
    gamma: float = 0.0
    dephasing: float = 0.0
    pump: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        if self.n_molecules > MAX_MOLECULES:
            raise CapacityError(f"N={self.n_molecules} exceeds the limit of {MAX_MOLECULES}")
        for name in ("gamma", "dephasing", "pump"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_params(cls, params: ModelParams, n_molecules: int) -> "CollectiveLindblad":
        return cls(n_molecules, params.gamma_collective, params.gamma_dephasing,
                   params.pump_rate, params.detuning)

    @cached_property
    def basis(self) -> DickeBasis:
        return DickeBasis(self.n_molecules)

    @property
    def dimension(self) -> int:
        return self.n_molecules + 1

    def to_dense(self) -> LindbladModel:
        ops = build_collective_operators(self.n_molecules)
        h = HBAR * self.detuning * ops.j_z.astype(complex)
        return LindbladModel(h, ((ops.j_minus, self.gamma), (ops.j_z, self.dephasing), (ops.j_plus, self.pump)))

    def default_step(self) -> float:
        rate = max(self.gamma, self.pump) * self.n_molecules
        lo = self.basis.lowering_coefficients()
        up = np.r_[0.0, lo[:-1]]
        max_decay = float(np.max(self.gamma * lo**2 + self.pump * up**2))
        dt = math.inf
        if rate > 0:
            dt = STEP_FRACTION / rate
        if max_decay > 0:
            # RK4 real-axis stability ends near -2.8; stay well inside it
            dt = min(dt, 1.0 / max_decay)
        return dt


def derive_collective_rate(coupling: float, cavity_linewidth: float, detuning: float = 0.0) -> float:
    """Bad-cavity emission rate g^2 kappa / (Delta^2 + kappa^2/4)."""
    if not cavity_linewidth > 0:
        raise ValueError("cavity_linewidth must be > 0")
    return coupling**2 * cavity_linewidth / (detuning**2 + cavity_linewidth**2 / 4)


def dephasing_from_coherence_time(tau: float) -> float:
    """Collective dephasing rate whose single-spin |<J+>| decays as exp(-t/tau)."""
    if not tau > 0:
        raise ValueError("coherence time must be > 0")
    return 2.0 / tau


# ---------------------------------------------------------------- states


def density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def initial_state(basis: DickeBasis, kind: str, theta: float | None = None) -> np.ndarray:
    """Density matrix for ``ground``, ``fully_excited`` or ``tipped`` (polar angle from the excited pole)."""
    if kind == "ground":
        return density(basis.ground())
    if kind == "fully_excited":
        return density(basis.excited())
    if kind == "tipped":
        if theta is None:
            theta = 2.0 / math.sqrt(basis.n_molecules)
        return density(basis.coherent(theta))
    raise ValueError(f"unknown initial state {kind!r}")


def check_density_matrix(rho, tol=TRACE_TOL):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.12g}, expected 1")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(rho)[0] < -POSITIVITY_TOL:
        raise ValueError("density matrix has a negative eigenvalue")


def trace_distance(rho, sigma) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma)))))


def expect(state, op) -> complex:
    """<op> for a state vector or density matrix."""
    state = np.asarray(state)
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.einsum("ij,ji->", state, op))


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("empty time grid")
    if len(t) > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("time grid must be strictly increasing")
    return t


# ---------------------------------------------------------------- unitary


def evolve_unitary(hamiltonian, psi0, t_grid, e_ops=None, store_states=True) -> Trajectory:
    """Exact propagation of a pure state under a time-independent H (joules).

    ``psi0`` is the state at ``t_grid[0]``.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    t = _check_grid(t_grid)
    if psi0.shape != (h.shape[0],):
        raise ValueError(f"state dimension {psi0.shape} does not match H {h.shape}")
    if abs(np.linalg.norm(psi0) - 1) > NORM_TOL:
        raise ValueError("initial state is not normalized")
    e_ops = e_ops or {}
    energies, vecs = np.linalg.eigh(h / HBAR)
    c0 = vecs.conj().T @ psi0
    states = np.empty((len(t), len(psi0)), dtype=complex)
    expect_vals = {k: np.empty(len(t), dtype=complex) for k in e_ops}
    norm_err = np.empty(len(t))
    for i, ti in enumerate(t):
        psi = vecs @ (np.exp(-1j * energies * (ti - t[0])) * c0)
        if not np.all(np.isfinite(psi)):
            raise InvariantViolation("non-finite state", time=ti)
        norm_err[i] = abs(np.linalg.norm(psi) - 1)
        if norm_err[i] > NORM_TOL:
            raise InvariantViolation(f"norm drift {norm_err[i]:.3g}", time=ti, worst="norm")
        states[i] = psi
        for k, op in e_ops.items():
            expect_vals[k][i] = np.vdot(psi, op @ psi)
    return Trajectory(
        times=t,
        expect=expect_vals,
        purity=np.ones(len(t)),
        trace_error=norm_err,
        min_eigenvalue=np.zeros(len(t)),
        final=states[-1].copy(),
        states=states if store_states else None,
    )


# ---------------------------------------------------------------- open


def rk4_advance(rhs, y, dt, nsteps):
    """Classical fixed-step RK4 for dy/dt = rhs(y)."""
    for _ in range(nsteps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def _dense_rhs(model: LindbladModel):
    h_eff = np.asarray(model.hamiltonian, dtype=complex) / HBAR
    jumps = []
    for op, rate in model.channels:
        if rate == 0:
            continue
        op = np.asarray(op, dtype=complex)
        h_eff = h_eff - 0.5j * rate * (op.conj().T @ op)
        jumps.append((rate, op, op.conj().T))
    h_eff_dag = h_eff.conj().T

    def rhs(rho):
        out = -1j * (h_eff @ rho - rho @ h_eff_dag)
        for rate, op, op_dag in jumps:
            out += rate * (op @ rho @ op_dag)
        return out

    return rhs


def _dense_step(model: LindbladModel) -> float:
    # bound on the generator's spectral radius; RK4 is stable below ~2.8/scale
    scale = np.linalg.norm(np.asarray(model.hamiltonian) / HBAR, 2)
    for op, rate in model.channels:
        if rate:
            scale += rate * np.linalg.norm(op, 2) ** 2
    return DENSE_STEP_FRACTION / scale if scale > 0 else math.inf


def _checkpoints(n_samples, dim, requested):
    if requested is None:
        requested = max(2, min(50, int(2e8 / max(dim, 1) ** 3)))
    idx = np.unique(np.linspace(0, n_samples - 1, min(requested, n_samples)).round().astype(int))
    mask = np.zeros(n_samples, dtype=bool)
    mask[idx] = True
    return mask


def evolve_master(model, rho0, t_grid, e_ops=None, max_step=None, store_states=False,
                  n_checkpoints=None) -> Trajectory:
    """Integrate the master equation from ``rho0`` (given at ``t_grid[0]``).

    ``model`` is a :class:`CollectiveLindblad` (fast ladder path; the
    expectation keys ``jpjm``, ``jmjp``, ``jz``, ``jp`` are always produced)
    or a dense :class:`LindbladModel` (``e_ops`` supplies the observables).
    Raises InvariantViolation when step refinement cannot keep the state
    physical.
    """
    t = _check_grid(t_grid)
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dimension, model.dimension):
        raise ValueError(f"initial state shape {rho0.shape} does not match model dimension {model.dimension}")
    check_density_matrix(rho0)
    if isinstance(model, CollectiveLindblad):
        return _evolve_collective(model, rho0, t, max_step, store_states, n_checkpoints)
    return _evolve_dense(model, rho0, t, e_ops or {}, max_step, store_states, n_checkpoints)


def _step_size(natural, t, max_step):
    dt = natural
    if len(t) > 1:
        dt = min(dt, float(np.min(np.diff(t))))
    if max_step is not None:
        dt = min(dt, max_step)
    return dt


def _drive(rho, t, dt, advance, observe, check_mask, store_states):
    """Shared output loop with per-interval step refinement.

    ``advance(rho, h, nsub)`` returns the state after time h in nsub steps;
    ``observe(rho, i, check_positivity)`` returns (values, purity, trace_err,
    herm_err, min_eig, physical_state).
    """
    n = len(t)
    values, purity = [], np.empty(n)
    trace_err, min_eig = np.empty(n), np.full(n, np.nan)
    states = [] if store_states else None
    steps = 0

    def accept(i, obs):
        vals, pur, terr, _, meig, phys = obs
        values.append(vals)
        purity[i], trace_err[i], min_eig[i] = pur, terr, meig
        if store_states:
            states.append(phys)

    obs = observe(rho, 0, check_mask[0])
    accept(0, obs)
    for i in range(1, n):
        h = t[i] - t[i - 1]
        nsub = max(1, math.ceil(h / dt * (1 - 1e-12))) if math.isfinite(dt) else 1
        for attempt in range(MAX_REFINEMENTS + 1):
            trial = advance(rho.copy(), h, nsub)
            if np.all(np.isfinite(trial)):
                obs = observe(trial, i, check_mask[i])
                _, _, terr, herr, meig, _ = obs
                bad = None
                if terr > TRACE_TOL:
                    bad = ("trace", terr)
                elif herr > HERMITIAN_TOL:
                    bad = ("hermiticity", herr)
                elif not math.isnan(meig) and meig < -POSITIVITY_TOL:
                    bad = ("positivity", meig)
            else:
                bad = ("finite", math.nan)
            if bad is None:
                break
            if attempt == MAX_REFINEMENTS:
                raise InvariantViolation(
                    f"{bad[0]} invariant violated at t={t[i]:.6g} s ({bad[1]:.3g}) with step {h / nsub:.3g} s",
                    time=t[i], step=h / nsub, worst=bad[0],
                )
            nsub *= 2
        steps += nsub
        rho = trial
        accept(i, obs)

    keys = values[0].keys()
    expect_vals = {k: np.array([v[k] for v in values]) for k in keys}
    final = states[-1] if store_states else obs[5]
    return Trajectory(
        times=t, expect=expect_vals, purity=purity, trace_error=trace_err,
        min_eigenvalue=min_eig, final=final,
        states=np.array(states) if store_states else None, dt=dt, steps=steps,
    )


def _evolve_dense(model, rho0, t, e_ops, max_step, store_states, n_checkpoints):
    rhs = _dense_rhs(model)
    dt = _step_size(_dense_step(model), t, max_step)
    check_mask = _checkpoints(len(t), model.dimension, n_checkpoints)

    def advance(rho, h, nsub):
        return rk4_advance(rhs, rho, h / nsub, nsub)

    def observe(rho, i, check_pos):
        vals = {k: complex(np.einsum("ij,ji->", rho, op)) for k, op in e_ops.items()}
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        meig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]) if check_pos else math.nan
        pur = float(np.sum(np.abs(rho) ** 2))
        return vals, pur, abs(np.trace(rho) - 1), herm, meig, rho

    return _drive(rho0.copy(), t, dt, advance, observe, check_mask, store_states)


def _evolve_collective(model, rho0, t, max_step, store_states, n_checkpoints):
    basis = model.basis
    lo = basis.lowering_coefficients()
    up = np.r_[0.0, lo[:-1]]
    m = basis.m_values
    dm = m[:, None] - m[None, :]
    lo2, up2 = lo**2, up**2
    jump_free = model.gamma == 0 and model.pump == 0
    dt = _step_size(math.inf if jump_free else model.default_step(), t, max_step)
    check_mask = _checkpoints(len(t), model.dimension, n_checkpoints)
    t0 = t[0]
    band = _kernels.bandwidth(rho0)
    work = np.empty((5,) + rho0.shape, dtype=complex)

    def advance(rho, h, nsub):
        if jump_free:
            return rho
        return _kernels.ladder_rk4(rho, lo, up, model.gamma, model.pump, h / nsub, nsub, band, work)

    def observe(rt, i, check_pos):
        # rt is the state stripped of the commuting phase/dephasing factor
        tau = t[i] - t0
        diag = rt.diagonal().real
        sub = np.einsum("k,k->", up[1:], rt.diagonal(-1))
        jp = sub * np.exp((1j * model.detuning - 0.5 * model.dephasing) * tau)
        vals = {
            "jpjm": complex(np.dot(lo2, diag)),
            "jmjp": complex(np.dot(up2, diag)),
            "jz": complex(np.dot(m, diag)),
            "jp": complex(jp),
        }
        herm = float(np.max(np.abs(rt - rt.conj().T)))
        if model.dephasing:
            damp = np.exp(-model.dephasing * tau * dm**2)
            pur = float(np.sum(np.abs(rt) ** 2 * damp))
        else:
            pur = float(np.sum(np.abs(rt) ** 2))
        phys = None
        meig = math.nan
        if check_pos or store_states or i == len(t) - 1:
            phys = rt * np.exp((-1j * model.detuning * dm - 0.5 * model.dephasing * dm**2) * tau)
            if check_pos:
                meig = float(np.linalg.eigvalsh(0.5 * (phys + phys.conj().T))[0])
        return vals, pur, abs(diag.sum() - 1), herm, meig, phys

    return _drive(rho0.copy(), t, dt, advance, observe, check_mask, store_states)


# ---------------------------------------------------------------- observables


def emission_intensity(trajectory: Trajectory, gamma: float) -> np.ndarray:
    """gamma <J+ J-> along a trajectory (photons/s)."""
    if "jpjm" not in trajectory.expect:
        raise ValueError("trajectory does not carry <J+J-> (key 'jpjm')")
    return gamma * trajectory.expect["jpjm"].real


def emission_trace(trajectory: Trajectory, gamma: float, pump: float = 0.0,
                   n_molecules: int = 0, engine: str = "quantum") -> EmissionTrace:
    ex = trajectory.expect
    pump_flux = pump * ex["jmjp"].real if "jmjp" in ex else None
    return EmissionTrace(
        times=trajectory.times,
        intensity=emission_intensity(trajectory, gamma),
        inversion=ex["jz"].real,
        coherence=np.abs(ex["jp"]),
        purity=trajectory.purity,
        trace_error=trajectory.trace_error,
        pump_flux=pump_flux,
        n_molecules=n_molecules,
        engine=engine,
    )


def simulate_collective(params: ModelParams, n_molecules: int, t_grid, initial="fully_excited",
                        theta=None, max_step=None) -> EmissionTrace:
    """Open collective evolution on the Dicke ladder, returned as an emission trace."""
    model = CollectiveLindblad.from_params(params, n_molecules)
    rho0 = initial_state(model.basis, initial, theta)
    traj = evolve_master(model, rho0, t_grid, max_step=max_step)
    return emission_trace(traj, params.gamma_collective, params.pump_rate, n_molecules, "quantum")


def run_superradiance_cycle(params: ModelParams, n_molecules: int, t_grid, max_step=None) -> EmissionTrace:
    """Pumped cycle from the ground state: absorb (w J+), emit collectively (gamma J-), repeat."""
    if not (params.pump_rate > 0 and params.gamma_collective > 0):
        raise ValueError("the cycle needs pump_rate > 0 and gamma_collective > 0")
    return simulate_collective(params, n_molecules, t_grid, "ground", max_step=max_step)


def steady_state_populations(n_molecules: int, gamma: float, pump: float) -> np.ndarray:
    """Stationary ladder populations under collective decay and pumping only.

    Each link k <-> k+1 carries gamma*lo^2 down and pump*lo^2 up, so detailed
    balance gives P[k+1]/P[k] = gamma/pump.
    """
    if not (gamma >= 0 and pump > 0):
        raise ValueError("need gamma >= 0 and pump > 0")
    p = np.zeros(n_molecules + 1)
    if gamma == 0:
        p[0] = 1.0
        return p
    # geometric in k; work in logs so large N cannot overflow
    ln_p = np.arange(n_molecules + 1) * math.log(gamma / pump)
    p = np.exp(ln_p - ln_p.max())
    return p / p.sum()


# ---------------------------------------------------------------- closed cavity


@dataclass
class CavityRun:
    trace: EmissionTrace
    photon_number: np.ndarray
    fock_tail: float  # max population in the highest retained Fock state
    trajectory: Trajectory = field(repr=False)


def run_closed_cavity(params: ModelParams, n_molecules: int, mode: FieldMode, t_grid,
                      initial="fully_excited", theta=None, counter_rotating=False,
                      tail_tol=1e-8) -> CavityRun:
    """Unitary Tavis-Cummings evolution, spin state x vacuum at t_grid[0]."""
    basis = DickeBasis(n_molecules)
    h = build_hamiltonian(params, basis, mode, counter_rotating)
    if initial == "ground":
        spin = basis.ground()
    elif initial == "fully_excited":
        spin = basis.excited()
    elif initial == "tipped":
        spin = basis.coherent(2.0 / math.sqrt(n_molecules) if theta is None else theta)
    else:
        raise ValueError(f"unknown initial state {initial!r}")
    vac = np.zeros(mode.dimension, dtype=complex)
    vac[0] = 1.0
    ops = build_collective_operators(n_molecules)
    e_ops = {
        "jpjm": lift_spin_operator(ops.j_plus @ ops.j_minus, mode),
        "jz": lift_spin_operator(ops.j_z, mode),
        "jp": lift_spin_operator(ops.j_plus, mode),
        "n": np.kron(np.eye(basis.dimension), mode.number()),
    }
    traj = evolve_unitary(h, np.kron(spin, vac), t_grid, e_ops=e_ops)
    amps = traj.states.reshape(len(traj.times), basis.dimension, mode.dimension)
    tail = float(np.max(np.sum(np.abs(amps[:, :, -1]) ** 2, axis=1)))
    if tail > tail_tol:
        raise InvariantViolation(
            f"Fock truncation tail population {tail:.3g} exceeds {tail_tol:g}; raise fock_cutoff",
            worst="fock_tail",
        )
    # reduced spin purity
    reduced = np.einsum("tif,tjf->tij", amps, amps.conj())
    purity = np.einsum("tij,tji->t", reduced, reduced).real
    traj.purity = purity
    trace = emission_trace(traj, params.gamma_collective, 0.0, n_molecules, "quantum")
    return CavityRun(trace, traj.expect["n"].real, tail, traj)
