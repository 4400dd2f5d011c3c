"""Dense pure-state simulation: construction, gates, expectations, bipartitions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ContractError, DomainError
from .pauli import PauliSum

ONE_QUBIT_FIXED = ("H", "X", "Y", "Z")
ONE_QUBIT_ROTATIONS = ("RX", "RY", "RZ")
TWO_QUBIT = ("CNOT", "RZZ")
GATES = ONE_QUBIT_FIXED + ONE_QUBIT_ROTATIONS + TWO_QUBIT

DEFAULT_DENSITY_CAP = 12


@dataclass
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ContractError("a StateVector holds a single 1-D amplitude array")
        kernels.n_qubits_of(amps)
        self.amplitudes = amps

    @property
    def n_qubits(self) -> int:
        return kernels.n_qubits_of(self.amplitudes)

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def init_basis_state(n_qubits: int, bitstring: int = 0) -> StateVector:
    if n_qubits < 1:
        raise DomainError(f"n_qubits must be >= 1, got {n_qubits}")
    if not 0 <= bitstring < 1 << n_qubits:
        raise DomainError(f"basis index {bitstring} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[bitstring] = 1.0
    return StateVector(amps)


def _check_targets(n: int, targets: Sequence[int]) -> None:
    for q in targets:
        if not 0 <= q < n:
            raise DomainError(f"qubit index {q} out of range for {n} qubits")
    if len(set(targets)) != len(targets):
        raise ContractError(f"repeated qubit in {tuple(targets)}")


def apply_gate_array(amps: np.ndarray, name: str, targets: Sequence[int], angle=None) -> None:
    """Apply a named gate in place to a (possibly batched) amplitude array."""
    if name == "H":
        kernels.apply_matrix_1q(amps, targets[0], kernels.FIXED_MATRICES["H"])
    elif name in ONE_QUBIT_FIXED:
        kernels.apply_pauli_1q(amps, targets[0], name)
    elif name in ONE_QUBIT_ROTATIONS:
        kernels.ROTATIONS[name](amps, targets[0], angle)
    elif name == "CNOT":
        kernels.apply_cnot(amps, targets[0], targets[1])
    elif name == "RZZ":
        kernels.apply_rzz(amps, targets[0], targets[1], angle)
    else:
        raise DomainError(f"unknown gate {name!r}")


def apply_gate(state: StateVector, gate: str, targets: int | Sequence[int], angle: float | None = None) -> StateVector:
    """Apply ``gate`` to ``state`` in place and return it.

    Rotations follow R_P(theta) = exp(-i theta/2 P); RZZ is exp(-i theta/2 Z Z).
    For CNOT the targets are ``(control, target)``.
    """
    if gate not in GATES:
        raise DomainError(f"unknown gate {gate!r}")
    targets = (targets,) if isinstance(targets, (int, np.integer)) else tuple(targets)
    arity = 2 if gate in TWO_QUBIT else 1
    if len(targets) != arity:
        raise ContractError(f"{gate} takes {arity} qubit(s), got {targets}")
    _check_targets(state.n_qubits, targets)
    needs_angle = gate in ONE_QUBIT_ROTATIONS or gate == "RZZ"
    if needs_angle and angle is None:
        raise ContractError(f"{gate} requires an angle")
    apply_gate_array(state.amplitudes, gate, targets, angle)
    return state


def expectation(state: StateVector, op: PauliSum, imag_tol: float = 1e-10) -> float:
    """<psi|op|psi> for a real-coefficient Pauli sum."""
    value = op.compiled(state.n_qubits).expectation_raw(state.amplitudes)
    scale = max(1.0, abs(value.real))
    if abs(value.imag) > imag_tol * scale:
        raise ContractError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def expectation_complex(state: StateVector, op: PauliSum) -> complex:
    return complex(op.compiled(state.n_qubits).expectation_raw(state.amplitudes))


def apply_operator(state: StateVector, op: PauliSum) -> np.ndarray:
    """op|psi> as a raw (unnormalized) amplitude array."""
    return op.compiled(state.n_qubits).apply(state.amplitudes)


def inner_product(a: StateVector | np.ndarray, b: StateVector | np.ndarray) -> complex:
    """<a|b>."""
    va = a.amplitudes if isinstance(a, StateVector) else np.asarray(a)
    vb = b.amplitudes if isinstance(b, StateVector) else np.asarray(b)
    if va.shape != vb.shape:
        raise ContractError(f"size mismatch: {va.shape} vs {vb.shape}")
    return complex(np.vdot(va, vb))


def _split(state: StateVector, subset: Iterable[int], *, allow_full: bool) -> tuple[np.ndarray, list[int], list[int]]:
    n = state.n_qubits
    part = sorted(set(int(q) for q in subset))
    if not part:
        raise ContractError("partition must be non-empty")
    if any(not 0 <= q < n for q in part):
        raise ContractError(f"partition {part} has qubits outside [0, {n})")
    if not allow_full and len(part) == n:
        raise ContractError("partition must be a proper subset")
    rest = [q for q in range(n) if q not in part]
    # tensor axis i corresponds to qubit n-1-i; put part (most significant first) then rest
    tensor = state.amplitudes.reshape((2,) * n)
    axes = [n - 1 - q for q in reversed(part)] + [n - 1 - q for q in reversed(rest)]
    mat = np.transpose(tensor, axes).reshape(1 << len(part), 1 << len(rest))
    return mat, part, rest


def reduced_density(state: StateVector, keep: Iterable[int], cap: int = DEFAULT_DENSITY_CAP) -> np.ndarray:
    """Density matrix of the ``keep`` qubits with the rest traced out.

    Row/column index bit ``i`` refers to the i-th smallest kept qubit, matching
    the little-endian convention of full amplitude indices.
    """
    keep = sorted(set(int(q) for q in keep))
    if len(keep) > cap:
        raise ContractError(f"|keep| = {len(keep)} exceeds the reduced-density cap {cap}")
    mat, _, _ = _split(state, keep, allow_full=True)
    return mat @ mat.conj().T


def schmidt_spectrum(state: StateVector, partition_a: Iterable[int]) -> np.ndarray:
    """Schmidt coefficients across ``partition_a`` | complement, descending."""
    mat, _, _ = _split(state, partition_a, allow_full=False)
    return np.linalg.svd(mat, compute_uv=False)


def von_neumann_bits(weights: np.ndarray, cutoff: float = 1e-14) -> float:
    """-sum w log2 w over a probability vector, dropping w below ``cutoff``."""
    w = np.asarray(weights, dtype=float)
    w = w[w >= cutoff]
    return float(-(w * np.log2(w)).sum()) + 0.0


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    dim = 1 << n_qubits
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(v / np.linalg.norm(v))


def ghz_state(n_qubits: int, sign: int = 1) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = np.sqrt(0.5)
    amps[-1] = sign * np.sqrt(0.5)
    return StateVector(amps)


def product_state(single_qubit: Sequence[np.ndarray]) -> StateVector:
    """Tensor product; ``single_qubit[q]`` is the 2-vector of qubit q."""
    amps = np.array([1.0 + 0j])
    for v in single_qubit:
        amps = np.kron(np.asarray(v, dtype=complex), amps)
    return StateVector(amps)
