import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nanosr import geometry as geo
from nanosr.dicke import (
    CapacityError,
    DickeBasis,
    FieldMode,
    ModelParams,
    build_collective_operators,
    build_hamiltonian,
    coupling_constant,
    excitation_number,
)
from nanosr.units import HBAR


def _fro(a):
    return np.linalg.norm(a, "fro")


def test_basis_shape():
    b = DickeBasis(5)
    assert b.dimension == 6
    assert b.j == 2.5
    assert np.all(np.diff(b.m_values) == -1)
    assert b.m_values[0] == b.j
    with pytest.raises(ValueError):
        DickeBasis(0)


def test_single_spin():
    ops = build_collective_operators(1)
    assert np.array_equal(ops.j_plus, [[0, 1], [0, 0]])
    assert np.array_equal(ops.j_minus, [[0, 0], [1, 0]])
    assert np.array_equal(ops.j_z, np.diag([0.5, -0.5]))


def test_two_spins_raising():
    b = DickeBasis(2)
    ops = build_collective_operators(2)
    np.testing.assert_allclose(ops.j_plus @ b.state(-1), math.sqrt(2) * b.state(0), atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 400))
def test_commutators(n):
    ops = build_collective_operators(n)
    jp, jm, jz = ops.j_plus, ops.j_minus, ops.j_z
    assert _fro(jp @ jm - jm @ jp - 2 * jz) < 1e-12 * n * max(1.0, _fro(jz))
    assert _fro(jz @ jp - jp @ jz - jp) < 1e-12 * max(1.0, _fro(jp))
    assert _fro(jz @ jm - jm @ jz + jm) < 1e-12 * max(1.0, _fro(jm))
    assert np.array_equal(jm, jp.T)
    assert np.allclose(np.tril(jp), 0)


def test_matrix_elements():
    b = DickeBasis(7)
    ops = build_collective_operators(7)
    j = b.j
    for m in b.m_values[1:]:
        expected = math.sqrt(j * (j + 1) - m * (m + 1))
        assert np.vdot(b.state(m + 1), ops.j_plus @ b.state(m)).real == pytest.approx(expected, rel=1e-14)


def test_capacity():
    with pytest.raises(CapacityError):
        build_collective_operators(4097)
    with pytest.raises(ValueError):
        build_collective_operators(0)


def test_coherent_state():
    b = DickeBasis(6)
    np.testing.assert_allclose(b.coherent(0.0), b.excited())
    np.testing.assert_allclose(b.coherent(math.pi), b.ground(), atol=1e-15)
    psi = b.coherent(1.1)
    ops = build_collective_operators(6)
    assert np.linalg.norm(psi) == pytest.approx(1)
    assert np.vdot(psi, ops.j_z @ psi).real == pytest.approx(3 * math.cos(1.1), rel=1e-12)
    assert abs(np.vdot(psi, ops.j_plus @ psi)) == pytest.approx(3 * math.sin(1.1), rel=1e-12)


def _params(**kw):
    return ModelParams.from_lab_units(mode_volume=geo.mode_volume(geo.POLYQ_SUP35), **kw)


def test_coupling_golden():
    # hand evaluation (CODATA 2018, literal inputs): mu = 6.409e-30 C m, w = 3.7673e13 rad/s,
    # V = 1.343e-28 m^3 -> g = 7.8549e13 rad/s; with unrounded inputs 7.85444e13 rad/s
    g = coupling_constant(_params())
    assert g == pytest.approx(7.85444e13, rel=1e-5)
    assert g == pytest.approx(7.8549e13, rel=1e-4)


def test_coupling_scaling():
    p = _params()
    assert coupling_constant(p.with_(dipole=0.0)) == 0
    assert coupling_constant(p.with_(mode_volume=4 * p.mode_volume)) == pytest.approx(
        coupling_constant(p) / 2, rel=1e-14)
    assert coupling_constant(p.with_(coupling=1.5)) == 1.5
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, 1.0, mode_volume=0.0)
    with pytest.raises(ValueError):
        coupling_constant(p.with_(mode_frequency=0.0))


def test_zero_coupling_diagonal():
    h = build_hamiltonian(_params(coupling=0.0), DickeBasis(3), FieldMode(4, 1e13))
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 12), st.integers(1, 8), st.floats(0.1, 3.0), st.floats(0.5, 2.0))
def test_hermitian_and_conserving(n, cutoff, g, w):
    p = ModelParams(epsilon=1.0, dipole=0.0, mode_frequency=w, mode_volume=1.0, coupling=g)
    basis, mode = DickeBasis(n), FieldMode(cutoff, w)
    h = build_hamiltonian(p, basis, mode)
    nexc = excitation_number(basis, mode)
    scale = _fro(h)
    assert _fro(h - h.conj().T) < 1e-12 * scale
    assert _fro(h @ nexc - nexc @ h) < 1e-12 * scale


def test_counter_rotating_breaks_conservation():
    p = ModelParams(epsilon=1.0, dipole=0.0, mode_frequency=1.0, mode_volume=1.0, coupling=0.3)
    basis, mode = DickeBasis(2), FieldMode(3, 1.0)
    h = build_hamiltonian(p, basis, mode, counter_rotating=True)
    nexc = excitation_number(basis, mode)
    assert _fro(h - h.conj().T) < 1e-12 * _fro(h)
    assert _fro(h @ nexc - nexc @ h) > 0.1 * HBAR


def _manifold_levels(h, nexc, n):
    idx = np.flatnonzero(np.isclose(np.diag(nexc), n))
    return np.linalg.eigvalsh(h[np.ix_(idx, idx)] / HBAR)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_jaynes_cummings_splitting(n):
    g = 0.37
    p = ModelParams(epsilon=2.0, dipole=0.0, mode_frequency=2.0, mode_volume=1.0, coupling=g)
    basis, mode = DickeBasis(1), FieldMode(8, 2.0)
    h = build_hamiltonian(p, basis, mode)
    # manifold with n+1 quanta holds |e, n> and |g, n+1>
    levels = _manifold_levels(h, excitation_number(basis, mode), n + 1)
    assert levels[1] - levels[0] == pytest.approx(2 * g * math.sqrt(n + 1), rel=1e-12)


def test_two_spin_single_excitation():
    g = 0.21
    p = ModelParams(epsilon=1.0, dipole=0.0, mode_frequency=1.0, mode_volume=1.0, coupling=g)
    basis, mode = DickeBasis(2), FieldMode(3, 1.0)
    levels = _manifold_levels(build_hamiltonian(p, basis, mode), excitation_number(basis, mode), 1)
    # {|1,0>|0>, |1,-1>|1>}: coupling g*sqrt(2), so splitting 2 g sqrt(2)
    assert len(levels) == 2
    assert levels[1] - levels[0] == pytest.approx(2 * g * math.sqrt(2), rel=1e-12)


def test_hamiltonian_capacity():
    p = ModelParams(epsilon=1.0, dipole=0.0, mode_frequency=1.0, mode_volume=1.0, coupling=0.1)
    with pytest.raises(CapacityError):
        build_hamiltonian(p, DickeBasis(2000), FieldMode(20, 1.0))
