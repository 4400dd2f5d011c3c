"""Exact diagonalization, parity resolution of the low-lying doublet, toy fixtures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .circuit import Op, ParametricCircuit, simulate
from .errors import CapacityError, ContractError, DegeneracyResolutionError, OracleError
from .pauli import PauliSum
from .statevector import StateVector

DENSE_CAP = 14
ITERATIVE_CAP = 20
# "auto" switches from dense to Lanczos above this size
AUTO_DENSE_MAX = 10
RESIDUAL_TOL = 1e-8
DEGENERACY_TOL = 1e-10
PARITY_SHARP_TOL = 1e-6


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: StateVector


@dataclass(frozen=True)
class ParityResolvedGround:
    even: EigenPair
    odd: EigenPair

    @property
    def gap(self) -> float:
        return abs(self.odd.value - self.even.value)

    @property
    def ground(self) -> EigenPair:
        return self.even if self.even.value <= self.odd.value else self.odd

    @property
    def ground_parity(self) -> int:
        return 1 if self.ground is self.even else -1


def _matvec(h: PauliSum, n: int):
    compiled = h.compiled(n)
    return compiled.apply, compiled.is_real


def _residual(h: PauliSum, n: int, value: float, vec: np.ndarray) -> float:
    return float(np.linalg.norm(h.compiled(n).apply(vec) - value * vec))


def lowest_eigenpairs(h: PauliSum, n_qubits: int, k: int = 1, method: str = "auto") -> list[EigenPair]:
    """The ``k`` lowest eigenpairs of ``h``, ascending, each residual-checked.

    ``method`` is ``"dense"`` (full matrix, n <= 14), ``"lanczos"`` (matrix-free,
    n <= 20) or ``"auto"``.
    """
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    if k > 1 << n_qubits:
        raise ContractError(f"k = {k} exceeds the Hilbert-space dimension {1 << n_qubits}")
    if method == "auto":
        method = "dense" if n_qubits <= AUTO_DENSE_MAX else "lanczos"
    if method == "dense":
        if n_qubits > DENSE_CAP:
            raise CapacityError(f"dense diagonalization capped at {DENSE_CAP} qubits, got {n_qubits}")
        values, vectors = _dense(h, n_qubits, k)
    elif method == "lanczos":
        if n_qubits > ITERATIVE_CAP:
            raise CapacityError(f"iterative diagonalization capped at {ITERATIVE_CAP} qubits, got {n_qubits}")
        values, vectors = lanczos(h, n_qubits, k)
    else:
        raise ContractError(f"unknown method {method!r}")
    pairs = []
    for value, vec in zip(values, vectors):
        vec = np.asarray(vec, dtype=complex)
        res = _residual(h, n_qubits, value, vec)
        if res >= RESIDUAL_TOL:
            raise OracleError(f"eigenpair residual {res:.2e} above {RESIDUAL_TOL}")
        pairs.append(EigenPair(float(value), StateVector(vec)))
    return pairs


def _dense(h: PauliSum, n: int, k: int):
    mat = h.to_sparse(n).toarray()
    values, vectors = scipy.linalg.eigh(mat, subset_by_index=[0, k - 1])
    return values, list(vectors.T)


def lanczos(
    h: PauliSum,
    n_qubits: int,
    k: int = 1,
    *,
    tol: float = 1e-10,
    max_basis: int = 60,
    max_restarts: int = 500,
    seed: int = 0,
):
    """Lowest ``k`` eigenpairs by restarted Lanczos with full reorthogonalization.

    Eigenpairs are found one at a time; each converged vector is locked and
    projected out of later Krylov spaces, so degenerate levels are resolved
    into orthogonal vectors.
    """
    apply, is_real = _matvec(h, n_qubits)
    dim = 1 << n_qubits
    dtype = float if is_real else complex
    rng = np.random.default_rng(seed)
    locked: list[np.ndarray] = []
    values: list[float] = []

    def deflate(w):
        for u in locked:
            w -= np.vdot(u, w) * u
        return w

    while len(locked) < min(k, dim):
        start = rng.normal(size=dim).astype(dtype)
        converged = False
        for _ in range(max_restarts):
            start = deflate(start)
            start /= np.linalg.norm(start)
            theta, ritz, converged = _lanczos_pass(apply, start, deflate, tol, min(max_basis, dim - len(locked)))
            start = ritz
            if converged:
                break
        if not converged:
            raise OracleError(f"Lanczos did not converge for eigenpair {len(locked)}")
        ritz = deflate(ritz)
        ritz /= np.linalg.norm(ritz)
        locked.append(ritz)
        values.append(theta)
    order = np.argsort(values, kind="stable")
    return [values[i] for i in order], [locked[i] for i in order]


def _lanczos_pass(apply, v0, deflate, tol, m):
    basis = [v0]
    alphas: list[float] = []
    betas: list[float] = []
    theta, s = None, None
    for j in range(m):
        w = deflate(apply(basis[j]))
        alphas.append(float(np.vdot(basis[j], w).real))
        for _ in range(2):
            for u in basis:
                w -= np.vdot(u, w) * u
            w = deflate(w)
        beta = float(np.linalg.norm(w))
        evals, evecs = scipy.linalg.eigh_tridiagonal(np.array(alphas), np.array(betas))
        theta, s = evals[0], evecs[:, 0]
        if beta * abs(s[-1]) < tol * max(1.0, abs(theta)) or beta < 1e-14:
            return theta, _combine(basis, s), True
        betas.append(beta)
        basis.append(w / beta)
    return theta, _combine(basis[: len(s)], s), False


def _combine(basis, coeffs):
    out = np.zeros_like(basis[0])
    for c, u in zip(coeffs, basis):
        out += c * u
    return out / np.linalg.norm(out)


def _parity_apply(vec: np.ndarray) -> np.ndarray:
    return vec[..., np.arange(vec.shape[-1]) ^ (vec.shape[-1] - 1)]


def parity_value(vec: np.ndarray) -> float:
    """<prod_i X_i> of a normalized amplitude vector."""
    return float(np.vdot(vec, _parity_apply(vec)).real)


def parity_resolved_ground(h: PauliSum, n_qubits: int, method: str = "auto") -> ParityResolvedGround:
    """Lowest state in each parity sector of a Hamiltonian commuting with prod_i X_i.

    Within an exactly (to 1e-10) degenerate pair, or whenever a returned vector
    has unsharp parity, the pair is rotated into prod_i X_i eigenstates. If the
    two lowest levels share a parity, more levels are requested until the
    opposite sector appears.
    """
    k = 2
    dim = 1 << n_qubits
    while True:
        pairs = lowest_eigenpairs(h, n_qubits, min(k, dim), method)
        resolved = _resolve_parity(h, n_qubits, pairs)
        by_parity: dict[int, EigenPair] = {}
        for sign, pair in resolved:
            by_parity.setdefault(sign, pair)
        if len(by_parity) == 2:
            return ParityResolvedGround(by_parity[1], by_parity[-1])
        if k >= dim:
            raise DegeneracyResolutionError("spectrum lacks one of the two parity sectors")
        k *= 2


def _resolve_parity(h: PauliSum, n: int, pairs: list[EigenPair]) -> list[tuple[int, EigenPair]]:
    # group consecutive levels closer than DEGENERACY_TOL, then rotate each group
    # into parity eigenstates when needed
    groups: list[list[EigenPair]] = []
    for pair in pairs:
        if groups and pair.value - groups[-1][-1].value < DEGENERACY_TOL:
            groups[-1].append(pair)
        else:
            groups.append([pair])
    out = []
    for group in groups:
        vecs = np.array([p.vector.amplitudes for p in group]).T
        sharp = all(abs(parity_value(v)) > 1 - PARITY_SHARP_TOL for v in vecs.T)
        if len(group) > 1 or not sharp:
            pmat = vecs.conj().T @ _parity_apply(vecs.T).T
            _, rot = np.linalg.eigh((pmat + pmat.conj().T) / 2)
            vecs = vecs @ rot
        hmat = h.compiled(n)
        for v in vecs.T:
            v = v / np.linalg.norm(v)
            p = parity_value(v)
            if abs(abs(p) - 1) > RESIDUAL_TOL:
                raise DegeneracyResolutionError(f"parity expectation {p:.3e} is not +-1 after resolution")
            value = float(np.vdot(v, hmat.apply(v)).real)
            out.append((1 if p > 0 else -1, EigenPair(value, StateVector(v))))
    return out


# --------------------------------------------------------------------------
# two-qubit toy fixtures


def toy_hamiltonian() -> PauliSum:
    """X on qubit 0 times Z on qubit 1."""
    return PauliSum.from_terms([(1.0, "X0 Z1")])


def toy_circuit(ansatz_id: int) -> ParametricCircuit:
    """Ansatz 1: RY(theta) on qubit 0 then CNOT(0 -> 1). Ansatz 2: RY(theta) alone."""
    if ansatz_id == 1:
        return ParametricCircuit(2, (Op("RY", (0,), 0), Op("CNOT", (0, 1))))
    if ansatz_id == 2:
        return ParametricCircuit(2, (Op("RY", (0,), 0),))
    raise ContractError(f"toy ansatz id must be 1 or 2, got {ansatz_id}")


def toy_energy_curve(ansatz_id: int, theta_grid) -> np.ndarray:
    circuit = toy_circuit(ansatz_id)
    thetas = np.asarray(theta_grid, dtype=float).reshape(-1, 1)
    states = simulate(circuit, thetas)
    h = toy_hamiltonian().compiled(2)
    return np.einsum("bj,bj->b", states.conj(), h.apply(states)).real
