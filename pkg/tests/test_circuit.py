import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfim_vqe import kernels
from tfim_vqe.ansatz import build_hea, build_hva
from tfim_vqe.circuit import (
    Op,
    ParametricCircuit,
    circuit_gradient,
    energy_and_gradient,
    parameter_shift_gradient,
    prepare_state,
    simulate,
    simulate_reference,
)
from tfim_vqe.errors import ContractError, DomainError
from tfim_vqe.lattice import TfimParams, build_tfim, chain
from tfim_vqe.pauli import PauliSum, single
from tfim_vqe.statevector import init_basis_state

from conftest import central_difference, random_circuit, random_operator


# -- construction and text format ------------------------------------------------


def test_op_validation():
    with pytest.raises(DomainError):
        Op("FOO", (0,))
    with pytest.raises(ContractError):
        Op("RX", (0,))
    with pytest.raises(ContractError):
        Op("RX", (0,), slot=0, angle=1.0)
    with pytest.raises(ContractError):
        Op("H", (0,), slot=0)
    with pytest.raises(ContractError):
        Op("CNOT", (0, 0))
    with pytest.raises(DomainError):
        ParametricCircuit(2, (Op("X", (2,)),))


def test_n_params_counts_highest_slot():
    c = ParametricCircuit(2, (Op("RX", (0,), 3), Op("RY", (1,), 0)))
    assert c.n_params == 4


def test_text_round_trip():
    c = random_circuit(np.random.default_rng(0), 4, 2)
    again = ParametricCircuit.from_text(c.to_text())
    assert again == c
    parsed = ParametricCircuit.from_text("QUBITS 2\nH 0  # comment\nRZZ 0 1 $0*0.5\nRX 1 0.25\n")
    assert parsed.ops == (Op("H", (0,)), Op("RZZ", (0, 1), 0, 0.5), Op("RX", (1,), angle=0.25))
    with pytest.raises(ContractError):
        ParametricCircuit.from_text("H 0\n")


def test_concatenation():
    a = ParametricCircuit(2, (Op("H", (0,)),))
    b = ParametricCircuit(2, (Op("CNOT", (0, 1)),))
    assert (a + b).ops == a.ops + b.ops
    with pytest.raises(ContractError):
        a + ParametricCircuit(3)


# -- simulation --------------------------------------------------------------------


@given(n=st.integers(2, 6), layers=st.integers(1, 3), seed=st.integers(0, 2**31))
def test_compiled_simulation_matches_gate_by_gate(kernel_route, n, layers, seed):
    rng = np.random.default_rng(seed)
    circuit = random_circuit(rng, n, layers)
    params = rng.uniform(-np.pi, np.pi, circuit.n_params)
    fast = simulate(circuit, params)
    kernels.USE_JIT = False
    reference = simulate_reference(circuit, params)
    np.testing.assert_allclose(fast, reference, atol=1e-12)


@given(n=st.integers(2, 5), seed=st.integers(0, 2**31))
def test_batched_simulation_matches_loop(n, seed):
    rng = np.random.default_rng(seed)
    circuit = random_circuit(rng, n, 2)
    params = rng.uniform(-np.pi, np.pi, (3, 2, circuit.n_params))
    batch = simulate(circuit, params)
    assert batch.shape == (3, 2, 1 << n)
    for idx in np.ndindex(3, 2):
        np.testing.assert_allclose(batch[idx], simulate(circuit, params[idx]), atol=1e-12)


def test_cnot_chain_is_one_permutation():
    ops = tuple(Op("CNOT", p) for p in [(0, 1), (1, 2), (2, 0), (0, 2), (3, 1)])
    circuit = ParametricCircuit(4, ops)
    assert len(circuit.program.steps) == 1
    rng = np.random.default_rng(1)
    start = rng.normal(size=16) + 1j * rng.normal(size=16)
    np.testing.assert_allclose(simulate(circuit, [], start), simulate_reference(circuit, [], start))


def test_simulation_starts_from_basis_index_or_state():
    circuit = ParametricCircuit(2, (Op("X", (0,)),))
    np.testing.assert_allclose(simulate(circuit, [], 0), [0, 1, 0, 0])
    np.testing.assert_allclose(simulate(circuit, [], init_basis_state(2, 1)), [1, 0, 0, 0])
    with pytest.raises(DomainError):
        simulate(circuit, [], 4)
    with pytest.raises(ContractError):
        simulate(circuit, [], np.ones(8))


def test_parameter_length_mismatch():
    circuit = ParametricCircuit(1, (Op("RX", (0,), 0),))
    with pytest.raises(ContractError):
        simulate(circuit, [0.1, 0.2])
    with pytest.raises(ContractError):
        energy_and_gradient(circuit, [0.1, 0.2], single("Z", 0))
    with pytest.raises(ContractError):
        prepare_state(circuit, [[0.1]])


# -- gradients ---------------------------------------------------------------------


def test_gradient_examples():
    ry = ParametricCircuit(1, (Op("RY", (0,), 0),))
    assert circuit_gradient(0, ry, [np.pi / 2], single("Z", 0))[0] == pytest.approx(-1.0)
    toy = ParametricCircuit(2, (Op("RY", (0,), 0),))
    h = PauliSum.from_terms([(1.0, "X0 Z1")])
    assert circuit_gradient(0, toy, [0.0], h)[0] == pytest.approx(1.0)


def test_hva_gradient_matches_finite_differences():
    lat = chain(4)
    circuit = build_hva(lat, 3)
    h = build_tfim(lat, TfimParams(0.8))
    params = np.random.default_rng(5).uniform(-1, 1, circuit.n_params)
    grad = circuit_gradient(0, circuit, params, h)
    fd = central_difference(circuit, params, h)
    assert np.max(np.abs(grad - fd)) <= 1e-6 * max(np.max(np.abs(fd)), 1e-2)


def test_adjoint_gradient_on_100_random_circuits():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(2, 9))
        circuit = random_circuit(rng, n, int(rng.integers(1, 5)))
        op = random_operator(rng, n)
        params = rng.uniform(-np.pi, np.pi, circuit.n_params)
        _, grad = energy_and_gradient(circuit, params, op)
        fd = central_difference(circuit, params, op)
        err = np.abs(grad - fd)
        assert np.all(err <= np.maximum(1e-6 * np.abs(fd), 1e-8))


@given(n=st.integers(2, 5), seed=st.integers(0, 2**31))
def test_adjoint_matches_parameter_shift(kernel_route, n, seed):
    rng = np.random.default_rng(seed)
    circuit = random_circuit(rng, n, 2)
    op = random_operator(rng, n)
    params = rng.uniform(-np.pi, np.pi, circuit.n_params)
    energy, grad = energy_and_gradient(circuit, params, op)
    shift = parameter_shift_gradient(0, circuit, params, op)
    np.testing.assert_allclose(grad, shift, atol=1e-10)
    assert energy == pytest.approx(op.compiled(n).expectation_raw(simulate(circuit, params)).real, abs=1e-12)


def test_hea_gradient_matches_parameter_shift():
    circuit = build_hea(3, 2)
    h = build_tfim(chain(3), TfimParams(0.4))
    params = np.random.default_rng(9).uniform(-np.pi, np.pi, circuit.n_params)
    np.testing.assert_allclose(
        circuit_gradient(0, circuit, params, h), parameter_shift_gradient(0, circuit, params, h), atol=1e-10
    )
