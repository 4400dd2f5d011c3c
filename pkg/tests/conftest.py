import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tfim_vqe import kernels
from tfim_vqe.circuit import Op, ParametricCircuit, simulate
from tfim_vqe.pauli import PauliSum

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def embed(n, ops):
    """Dense 2^n matrix of a tensor product; ``ops`` maps qubit -> 2x2 matrix, qubit 0 least significant."""
    mats = [ops.get(q, PAULI["I"]) for q in reversed(range(n))]
    return functools.reduce(np.kron, mats)


def pauli_matrix(n, factors, coefficient=1.0):
    return coefficient * embed(n, {q: PAULI[p] for q, p in factors})


def free_fermion_ground_energy(n, h):
    """Even-parity ground energy of the periodic ferromagnetic chain via Jordan-Wigner."""
    m = np.arange(1, n // 2 + 1)
    return -2.0 * np.sum(np.sqrt(1 + h * h - 2 * h * np.cos(np.pi * (2 * m - 1) / n)))


@pytest.fixture(params=[True, False], ids=["jit", "numpy"])
def kernel_route(request, monkeypatch):
    """Run a test once through the compiled kernels and once through the array kernels."""
    monkeypatch.setattr(kernels, "USE_JIT", request.param)
    return request.param


def random_circuit(rng, n, layers):
    """Layers of shared-slot rotations, CNOT-RZ-CNOT blocks, loose CNOTs and fixed gates."""
    ops = []
    slot = 0
    for _ in range(layers):
        for q in range(n):
            gate = ["RX", "RY", "RZ"][rng.integers(3)]
            ops.append(Op(gate, (q,), slot + int(rng.integers(2)), float(rng.choice([1.0, -0.5, 2.0]))))
        slot += 2
        for _ in range(int(rng.integers(1, n + 1))):
            a, b = (int(q) for q in rng.choice(n, 2, replace=False))
            if rng.random() < 0.5:
                ops += [Op("CNOT", (a, b)), Op("RZ", (b,), slot), Op("CNOT", (a, b))]
            else:
                ops.append(Op("CNOT", (a, b)))
        slot += 1
        ops.append(Op("H", (int(rng.integers(n)),)))
        ops.append(Op("RY", (int(rng.integers(n)),), angle=float(rng.normal())))
        if rng.random() < 0.3:
            a, b = (int(q) for q in rng.choice(n, 2, replace=False))
            ops.append(Op("RZZ", (a, b), slot - 1, 0.7))
    return ParametricCircuit(n, tuple(ops))


def random_operator(rng, n):
    terms = []
    for _ in range(4):
        k = int(rng.integers(1, min(n, 3) + 1))
        qs = rng.choice(n, k, replace=False)
        terms.append((float(rng.normal()), " ".join(f"{'XYZ'[rng.integers(3)]}{q}" for q in qs)))
    return PauliSum.from_terms(terms)


def central_difference(circuit, params, op, step=1e-5):
    compiled = op.compiled(circuit.n_qubits)
    grad = np.zeros_like(params)
    for k in range(len(params)):
        shift = np.zeros_like(params)
        shift[k] = step
        plus = compiled.expectation_raw(simulate(circuit, params + shift)).real
        minus = compiled.expectation_raw(simulate(circuit, params - shift)).real
        grad[k] = (plus - minus) / (2 * step)
    return grad


# -- acceptance reporting -----------------------------------------------------------

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


class AcceptanceLog:
    """``log(name, ok, detail)`` records one criterion line and asserts ``ok``; ``log.note`` adds an INFO line."""

    def __init__(self, lines):
        self.lines = lines

    def _emit(self, line):
        self.lines.append(line)
        print(line)

    def __call__(self, name, ok, detail):
        self._emit(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        assert ok, detail

    def note(self, name, detail):
        self._emit(f"INFO  {name}: {detail}")


@pytest.fixture
def acceptance(request):
    return AcceptanceLog(request.config.stash[ACCEPTANCE_KEY])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
