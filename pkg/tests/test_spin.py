import math

import numpy as np
import pytest
import scipy.linalg

from spin_sbs.core.errors import ValidationError
from spin_sbs.core.spin import (
    SpinQuantumNumber,
    SpinState,
    SystemState,
    build_spin_operators,
    expectation,
    fidelity,
    hermitian_matrix_function,
    magnetic_numbers,
    partition_function,
    purity,
    spin_coherent_state,
    thermal_state,
    trace_distance,
    unitary_evolution,
)
from spin_sbs.core.values import format_half, parse_list, parse_twice

SPINS = [SpinQuantumNumber(n) for n in range(1, 7)]
tol = 1e-12


@pytest.mark.parametrize("text,twice", [("3/2", 3), ("-1/2", -1), ("+5/2", 5), ("2", 4), ("1.5", 3), ("4/2", 4)])
def test_parse_twice(text, twice):
    assert parse_twice(text) == twice


@pytest.mark.parametrize("text", ["1/4", "0.3", "abc", "", "1/0"])
def test_parse_twice_rejects(text):
    with pytest.raises(ValidationError):
        parse_twice(text)


def test_format_half_and_list():
    assert format_half(3) == "3/2"
    assert format_half(-1) == "-1/2"
    assert format_half(4) == "2"
    assert parse_list("1/2, 1  3/2", parse_twice) == [1, 2, 3]
    assert parse_list("  ", parse_twice) == []


def test_spin_quantum_number():
    j = SpinQuantumNumber.parse("3/2")
    assert j.twice_j == 3 and j.j == 1.5 and j.dimension == 4
    assert str(j) == "3/2"
    assert SpinQuantumNumber.of(1.5) == j
    assert SpinQuantumNumber.of("3/2") == j
    np.testing.assert_array_equal(j.magnetic_numbers(), [1.5, 0.5, -0.5, -1.5])
    assert j.index_of(1.5) == 0
    assert j.index_of(-1.5) == 3
    for bad in (1.0, 2.5, 0.25):
        with pytest.raises(ValidationError):
            j.index_of(bad)
    with pytest.raises(ValidationError):
        SpinQuantumNumber(-1)
    with pytest.raises(ValidationError):
        SpinQuantumNumber(41)
    with pytest.raises(ValidationError):
        SpinQuantumNumber.of(0.75)


@pytest.mark.parametrize("j", SPINS, ids=str)
def test_spin_algebra(j):
    sx, sy, sz = build_spin_operators(j)
    x, y, z = sx.matrix, sy.matrix, sz.matrix
    assert np.allclose(x @ y - y @ x, 1j * z, atol=tol)
    assert np.allclose(y @ z - z @ y, 1j * x, atol=tol)
    assert np.allclose(z @ x - x @ z, 1j * y, atol=tol)
    casimir = x @ x + y @ y + z @ z
    assert np.allclose(casimir, j.j * (j.j + 1.0) * np.eye(j.dimension), atol=tol)
    np.testing.assert_allclose(np.diag(z).real, magnetic_numbers(j))


def test_unitary_evolution_is_unitary():
    j = SpinQuantumNumber(5)
    sx, _, sz = build_spin_operators(j)
    u = unitary_evolution(2.0 * (0.7 * sz.matrix - sx.matrix), 3.3)
    assert np.allclose(u @ u.conj().T, np.eye(j.dimension), atol=tol)
    assert np.allclose(u, scipy.linalg.expm(-3.3j * 2.0 * (0.7 * sz.matrix - sx.matrix)), atol=1e-11)


@pytest.mark.parametrize("t1,t2", [(0.3, 1.1), (2.5, -0.7), (0.0, 4.2)])
def test_unitary_evolution_composes(t1, t2):
    j = SpinQuantumNumber(4)
    sx, _, sz = build_spin_operators(j)
    h = 2.0 * (1.3 * sz.matrix - sx.matrix)
    composed = unitary_evolution(h, t1) @ unitary_evolution(h, t2)
    np.testing.assert_allclose(composed, unitary_evolution(h, t1 + t2), atol=1e-10)


def test_matrix_function_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        hermitian_matrix_function(np.array([[1.0, 2.0], [0.0, 1.0]]), np.exp)
    with pytest.raises(ValidationError):
        unitary_evolution(np.array([[0.0, 1j], [1j, 0.0]]), 1.0)


def test_state_validation():
    j = SpinQuantumNumber(1)
    with pytest.raises(ValidationError):
        SpinState(j, np.array([[1.0, 0.5], [0.0, 0.0]]))       # not Hermitian
    with pytest.raises(ValidationError):
        SpinState(j, np.eye(2))                               # trace 2
    with pytest.raises(ValidationError):
        SpinState(j, np.diag([1.5, -0.5]))                    # negative
    with pytest.raises(ValidationError):
        SpinState(j, np.eye(3) / 3)                           # wrong shape
    with pytest.raises(ValidationError):
        SpinState.pure(j, [0.0, 0.0])


def test_distance_measures():
    j = SpinQuantumNumber(1)
    up = SpinState.pure(j, [1.0, 0.0])
    down = SpinState.pure(j, [0.0, 1.0])
    mixed = SpinState.maximally_mixed(j)
    assert fidelity(up, up) == pytest.approx(1.0, abs=tol)
    assert fidelity(up, down) == pytest.approx(0.0, abs=1e-7)
    assert trace_distance(up, down) == pytest.approx(1.0, abs=tol)
    assert fidelity(up, mixed) == pytest.approx(math.sqrt(0.5), abs=1e-10)
    assert purity(mixed) == pytest.approx(0.5, abs=tol)
    assert purity(up) == pytest.approx(1.0, abs=tol)


def test_fidelity_symmetric_for_random_states():
    rng = np.random.default_rng(7)
    j = SpinQuantumNumber(3)
    states = []
    for _ in range(2):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        states.append(SpinState(j, rho / np.trace(rho)))
    f_ab = fidelity(*states)
    f_ba = fidelity(*reversed(states))
    assert f_ab == pytest.approx(f_ba, abs=1e-10)
    assert 0.0 <= f_ab <= 1.0 + 1e-12


@pytest.mark.parametrize("seed", [3, 4, 5])
def test_fidelity_invariant_under_shared_unitary(seed):
    rng = np.random.default_rng(seed)
    j = SpinQuantumNumber(3)
    states = []
    for _ in range(2):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        states.append(rho / np.trace(rho))
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    u = unitary_evolution(b + b.conj().T, 0.8)
    rotated = [SpinState(j, u @ rho @ u.conj().T) for rho in states]
    before = fidelity(SpinState(j, states[0]), SpinState(j, states[1]))
    assert fidelity(*rotated) == pytest.approx(before, abs=1e-10)


@pytest.mark.parametrize("j", SPINS, ids=str)
@pytest.mark.parametrize("theta,phi", [(0.0, 0.0), (0.4, 1.1), (math.pi / 2, 0.0), (2.5, 4.0), (math.pi, 0.3)])
def test_coherent_state_orientation(j, theta, phi):
    state = spin_coherent_state(j, theta, phi)
    sx, sy, sz = build_spin_operators(j)
    s = np.array([expectation(state, op) for op in (sx, sy, sz)])
    n = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), -math.cos(theta)])
    np.testing.assert_allclose(s, j.j * n, atol=1e-10)
    assert purity(state) == pytest.approx(1.0, abs=tol)


def test_coherent_state_pole_is_lowest_weight():
    j = SpinQuantumNumber(4)
    state = spin_coherent_state(j, 0.0)
    assert np.real(state.rho[-1, -1]) == pytest.approx(1.0, abs=tol)
    with pytest.raises(ValidationError):
        spin_coherent_state(j, -0.1)


@pytest.mark.parametrize("j", SPINS, ids=str)
@pytest.mark.parametrize("x", [0.0, 0.3, 0.9, 3.0])
def test_thermal_state(j, x):
    sx, _, _ = build_spin_operators(j)
    z = partition_function(j, x)
    expected = scipy.linalg.expm(-2.0 * x * sx.matrix) / z
    rho = thermal_state(j, x).rho
    assert np.allclose(rho, expected, rtol=1e-10, atol=1e-13)
    assert z == pytest.approx(np.real(np.trace(scipy.linalg.expm(-2.0 * x * sx.matrix))), rel=1e-12)


def test_thermal_state_axes():
    j = SpinQuantumNumber(2)
    rho_z = thermal_state(j, 0.5, axis="z").rho
    np.testing.assert_allclose(np.abs(rho_z - np.diag(np.diag(rho_z))), 0.0, atol=tol)
    # basis ordered +j..-j, so the -j weight is largest
    assert np.real(rho_z[-1, -1]) > np.real(rho_z[0, 0])
    with pytest.raises(ValidationError):
        thermal_state(j, 0.5, axis="w")
    with pytest.raises(ValidationError):
        thermal_state(j, -1.0)


def test_partition_function_large_argument():
    j = SpinQuantumNumber(40)
    x = 8.0
    expected = math.exp(40 * x) * (1 - math.exp(-2 * 41 * x)) / (1 - math.exp(-2 * x))
    assert partition_function(j, x) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x", [9e-7, 1e-9, 1e-4])
def test_partition_function_small_argument(x):
    j = SpinQuantumNumber(4)
    # sinh(5x)/sinh(x) = 5 + 20 x^2 + O(x^4)
    z = partition_function(j, x)
    assert z == pytest.approx(5.0 + 20.0 * x * x, rel=1e-14)
    assert partition_function(j, 0.0) == 5.0


def test_system_state():
    j_s = SpinQuantumNumber(1)
    s = SystemState.equal_superposition(j_s, -0.5, 0.5)
    np.testing.assert_allclose(s.alpha, 0.5 * np.ones((2, 2)), atol=tol)
    np.testing.assert_allclose(s.populations(), [0.5, 0.5])
    with pytest.raises(ValidationError):
        SystemState.equal_superposition(j_s, 0.5, 0.5)
    with pytest.raises(ValidationError):
        SystemState.from_populations(j_s, [0.7, 0.7])
    d = SystemState.from_populations(SpinQuantumNumber(3), [0.1, 0.2, 0.3, 0.4])
    assert d.alpha[0, 1] == 0.0
