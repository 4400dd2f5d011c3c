"""Parametric circuits, their simulation, and exact gradients.

A circuit is a flat list of gate operations. Each rotation is bound either to
a fixed angle or to ``multiplier * params[slot]``; several gates may share a
slot. Before simulation a circuit is compiled into a shorter list of steps:

* ``CNOT - RZ - CNOT`` on one pair collapses to a native diagonal RZZ,
* runs of diagonal rotations (RZ, RZZ) become one phase multiplication,
* runs of CNOTs become one basis permutation (a linear map over GF(2)),
* consecutive fixed single-qubit gates on one qubit become one 2x2 matrix.

Gradients use the adjoint method: one forward pass, then a reverse sweep that
un-applies each step to both the state and ``H|psi>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import _jit, kernels
from .errors import ContractError, DomainError
from .pauli import PauliSum
from .statevector import (
    GATES,
    ONE_QUBIT_FIXED,
    ONE_QUBIT_ROTATIONS,
    TWO_QUBIT,
    StateVector,
    apply_gate_array,
)

PARAMETRIC = ONE_QUBIT_ROTATIONS + ("RZZ",)
# phase-matrix fusion is used while n_items * 2**n stays below this
DIAG_MATRIX_BUDGET = 1 << 22


@dataclass(frozen=True)
class Op:
    gate: str
    targets: tuple[int, ...]
    slot: int | None = None
    multiplier: float = 1.0
    angle: float | None = None

    def __post_init__(self):
        if self.gate not in GATES:
            raise DomainError(f"unknown gate {self.gate!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        arity = 2 if self.gate in TWO_QUBIT else 1
        if len(self.targets) != arity or len(set(self.targets)) != arity:
            raise ContractError(f"{self.gate} needs {arity} distinct qubit(s), got {self.targets}")
        if self.gate in PARAMETRIC:
            if (self.slot is None) == (self.angle is None):
                raise ContractError(f"{self.gate} needs exactly one of slot or fixed angle")
            if self.slot is not None and self.slot < 0:
                raise ContractError(f"negative parameter slot {self.slot}")
            if not np.isfinite(self.multiplier):
                raise ContractError("binding multiplier must be finite")
        elif self.slot is not None or self.angle is not None:
            raise ContractError(f"{self.gate} takes no angle")

    @property
    def is_parametric(self) -> bool:
        return self.slot is not None

    def angle_from(self, params):
        if self.slot is None:
            return self.angle
        return self.multiplier * params[..., self.slot]


@dataclass(frozen=True)
class ParametricCircuit:
    n_qubits: int
    ops: tuple[Op, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            for q in op.targets:
                if not 0 <= q < self.n_qubits:
                    raise DomainError(f"{op.gate} on qubit {q} outside [0, {self.n_qubits})")

    @cached_property
    def n_params(self) -> int:
        return 1 + max((op.slot for op in self.ops if op.slot is not None), default=-1)

    @cached_property
    def program(self) -> "Program":
        return Program.compile(self)

    def __add__(self, other: "ParametricCircuit") -> "ParametricCircuit":
        if other.n_qubits != self.n_qubits:
            raise ContractError("cannot concatenate circuits of different widths")
        return ParametricCircuit(self.n_qubits, self.ops + other.ops)

    def to_text(self) -> str:
        lines = [f"QUBITS {self.n_qubits}"]
        for op in self.ops:
            parts = [op.gate, *map(str, op.targets)]
            if op.slot is not None:
                parts.append(f"${op.slot}" if op.multiplier == 1.0 else f"${op.slot}*{op.multiplier!r}")
            elif op.angle is not None:
                parts.append(repr(float(op.angle)))
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ParametricCircuit":
        """Parse the line format ``GATE targets [$slot[*mult] | angle]``; ``#`` starts a comment."""
        n_qubits = None
        ops = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if tok[0] == "QUBITS":
                n_qubits = int(tok[1])
                continue
            gate = tok[0]
            if gate not in GATES:
                raise DomainError(f"line {lineno}: unknown gate {gate!r}")
            arity = 2 if gate in TWO_QUBIT else 1
            targets = tuple(int(t) for t in tok[1 : 1 + arity])
            rest = tok[1 + arity :]
            kw = {}
            if rest:
                b = rest[0]
                if b.startswith("$"):
                    slot, _, mult = b[1:].partition("*")
                    kw = {"slot": int(slot), "multiplier": float(mult) if mult else 1.0}
                else:
                    kw = {"angle": float(b)}
            ops.append(Op(gate, targets, **kw))
        if n_qubits is None:
            raise ContractError("missing QUBITS header")
        return cls(n_qubits, tuple(ops))


# --------------------------------------------------------------------------
# compiled steps


class _Fixed1Q:
    parametric = False

    def __init__(self, q: int, u: np.ndarray):
        self.q, self.u, self.u_dag = q, u, u.conj().T

    def forward(self, amps, params):
        kernels.apply_matrix_1q(amps, self.q, self.u)

    def inverse(self, amps, params):
        kernels.apply_matrix_1q(amps, self.q, self.u_dag)


class _RotationLayer:
    """Consecutive parametric rotations about one axis (RX or RY).

    Same-axis rotations commute, so every gradient term of the layer can be
    read off the states after the whole layer.
    """

    parametric = True

    def __init__(self, ops: list[Op]):
        self.ops = ops
        self.pauli = ops[0].gate[1]
        self.label = "XYZ".index(self.pauli)
        self.kernel = kernels.ROTATIONS[ops[0].gate]
        self.qubits = np.array([op.targets[0] for op in ops], dtype=np.int64)
        self.slots = np.array([op.slot for op in ops], dtype=np.int64)
        self.mults = np.array([op.multiplier for op in ops])

    def forward(self, amps, params):
        if amps.ndim == 1 and kernels.USE_JIT:
            _jit.rotation_layer(amps, self.qubits, self.label, self.mults * params[self.slots])
            return
        for op in self.ops:
            self.kernel(amps, op.targets[0], op.multiplier * params[..., op.slot])

    def inverse(self, amps, params):
        if amps.ndim == 1 and kernels.USE_JIT:
            _jit.rotation_layer(amps, self.qubits[::-1].copy(), self.label, -(self.mults * params[self.slots])[::-1])
            return
        for op in reversed(self.ops):
            self.kernel(amps, op.targets[0], -op.multiplier * params[..., op.slot])

    def accumulate(self, lam, psi, grad):
        if kernels.USE_JIT:
            overlaps = _jit.im_pauli_overlaps(lam, psi, self.qubits, self.label)
        else:
            overlaps = np.empty(len(self.ops))
            for i, q in enumerate(self.qubits):
                p_psi = psi.copy()
                kernels.apply_pauli_1q(p_psi, int(q), self.pauli)
                overlaps[i] = np.vdot(lam, p_psi).imag
        np.add.at(grad, self.slots, self.mults * overlaps)


class _CnotBlock:
    parametric = False

    def __init__(self, n: int, pairs: list[tuple[int, int]]):
        self.n, self.pairs = n, tuple(pairs)

    @cached_property
    def _gathers(self):
        return _cnot_gathers(self.n, self.pairs)

    def forward(self, amps, params):
        if len(self.pairs) == 1:
            kernels.apply_cnot(amps, *self.pairs[0])
        else:
            amps[...] = amps[..., self._gathers[0]]

    def inverse(self, amps, params):
        if len(self.pairs) == 1:
            kernels.apply_cnot(amps, *self.pairs[0])
        else:
            amps[...] = amps[..., self._gathers[1]]


@lru_cache(maxsize=64)
def _cnot_gathers(n: int, pairs: tuple[tuple[int, int], ...]):
    def rows_after(seq):
        rows = [1 << k for k in range(n)]
        for c, t in seq:
            rows[t] ^= rows[c]
        return tuple(rows)

    fwd = kernels.linear_permutation(n, rows_after(pairs))
    inv = kernels.linear_permutation(n, rows_after(reversed(pairs)))
    # new = old[f^-1]; undo: old = new[f]
    return inv, fwd


class _DiagonalRun:
    """Commuting RZ / RZZ rotations applied as one phase multiplication."""

    parametric = True

    def __init__(self, n: int, items: list[Op]):
        self.n = n
        self.items = items
        self.param_items = [op for op in items if op.slot is not None]
        self.qa = np.array([op.targets[0] for op in items], dtype=np.int64)
        self.qb = np.array([op.targets[1] if len(op.targets) == 2 else -1 for op in items], dtype=np.int64)
        self.is_param = np.array([op.slot is not None for op in items])
        self.all_slots = np.array([op.slot if op.slot is not None else 0 for op in items], dtype=np.int64)
        self.all_mults = np.array([op.multiplier for op in items])
        self.fixed_angles = np.array([op.angle if op.slot is None else 0.0 for op in items], dtype=float)
        self.slots = self.all_slots[self.is_param]
        self.mults = self.all_mults[self.is_param]
        self.pqa, self.pqb = self.qa[self.is_param], self.qb[self.is_param]
        self.use_matrix = len(items) << n <= DIAG_MATRIX_BUDGET
        if self.use_matrix:
            self.signs = _sign_matrix(n, tuple(op.targets for op in self.param_items))
            fixed = np.zeros(1 << n)
            for op in items:
                if op.slot is None:
                    fixed += op.angle * _signs(n, op.targets)
            self.fixed = fixed if any(op.slot is None for op in items) else None

    def _angles(self, params):
        return np.where(self.is_param, self.all_mults * params[self.all_slots], self.fixed_angles)

    def _phase(self, params):
        theta = params[..., self.slots] * self.mults
        total = theta @ self.signs
        if self.fixed is not None:
            total = total + self.fixed
        return np.exp(-0.5j * total)

    def _apply(self, amps, params, sign):
        if amps.ndim == 1 and kernels.USE_JIT:
            _jit.diagonal_phase(amps, self.qa, self.qb, self._angles(params), sign)
        elif self.use_matrix:
            phase = self._phase(params)
            amps *= phase if sign > 0 else np.conj(phase)
        else:
            order = self.items if sign > 0 else reversed(self.items)
            for op in order:
                _apply_diag_item(amps, op, sign * op.angle_from(params))

    def forward(self, amps, params):
        self._apply(amps, params, 1.0)

    def inverse(self, amps, params):
        self._apply(amps, params, -1.0)

    def accumulate(self, lam, psi, grad):
        w = (np.conj(lam) * psi).imag
        if kernels.USE_JIT:
            sums = _jit.signed_sums(w, self.pqa, self.pqb)
        else:
            sums = np.array([_signed_sum(w, op.targets) for op in self.param_items])
        np.add.at(grad, self.slots, self.mults * sums)


@lru_cache(maxsize=32)
def _sign_matrix(n: int, targets: tuple[tuple[int, ...], ...]) -> np.ndarray:
    out = np.array([_signs(n, t) for t in targets]).reshape(-1, 1 << n)
    out.setflags(write=False)
    return out


def _signs(n: int, targets: tuple[int, ...]) -> np.ndarray:
    if len(targets) == 1:
        return kernels.z_signs(n, targets[0])
    return kernels.zz_signs(n, *targets)


def _apply_diag_item(amps, op: Op, angle) -> None:
    if len(op.targets) == 1:
        kernels.apply_rz(amps, op.targets[0], angle)
    else:
        kernels.apply_rzz(amps, op.targets[0], op.targets[1], angle)


def _signed_sum(w: np.ndarray, targets: tuple[int, ...]) -> float:
    """sum_j s(j) w[j] with s the Z (or ZZ) eigenvalue, via strided slices."""
    if len(targets) == 1:
        v = kernels._pair_view(w, targets[0])
        return float(v[..., 0, :].sum() - v[..., 1, :].sum())
    view, ax_a, ax_b = kernels._quad_view(w, *targets)
    total = 0.0
    for bit_a in (0, 1):
        for bit_b in (0, 1):
            idx = [slice(None)] * view.ndim
            idx[ax_a], idx[ax_b] = bit_a, bit_b
            total += (1 if bit_a == bit_b else -1) * float(view[tuple(idx)].sum())
    return total


def _fuse_rzz(ops: Sequence[Op]) -> list[Op]:
    """Replace adjacent CNOT(a,b) RZ(b) CNOT(a,b) with RZZ(a,b)."""
    out = []
    i = 0
    while i < len(ops):
        if i + 2 < len(ops):
            a, b, c = ops[i], ops[i + 1], ops[i + 2]
            if (
                a.gate == "CNOT"
                and c.gate == "CNOT"
                and a.targets == c.targets
                and b.gate == "RZ"
                and b.targets[0] == a.targets[1]
            ):
                out.append(Op("RZZ", a.targets, b.slot, b.multiplier, b.angle))
                i += 3
                continue
        out.append(ops[i])
        i += 1
    return out


def _fixed_matrix(op: Op) -> np.ndarray:
    if op.gate in ONE_QUBIT_FIXED:
        return kernels.FIXED_MATRICES[op.gate]
    amps = np.eye(2, dtype=complex)
    kernels.ROTATIONS[op.gate](amps, 0, op.angle)
    return amps.T


class Program:
    """Compiled step list for one circuit."""

    def __init__(self, n: int, steps: list):
        self.n = n
        self.steps = steps

    @classmethod
    def compile(cls, circuit: ParametricCircuit) -> "Program":
        n = circuit.n_qubits
        steps: list = []
        pending: dict[int, np.ndarray] = {}
        group: list = [None, []]  # kind, items

        def close():
            kind, items = group
            if kind == "diag":
                steps.append(_DiagonalRun(n, items))
            elif kind == "cnot":
                steps.append(_CnotBlock(n, [op.targets for op in items]))
            elif kind is not None:
                steps.append(_RotationLayer(items))
            group[0], group[1] = None, []

        def flush(qubits):
            # a pending gate is the latest op on its qubit, so every pending
            # gate may be emitted here; doing so keeps later runs unbroken
            if any(q in pending for q in qubits):
                close()
                for q in sorted(pending):
                    steps.append(_Fixed1Q(q, pending.pop(q)))

        def add(kind, op):
            if group[0] != kind:
                close()
                group[0] = kind
            group[1].append(op)

        for op in _fuse_rzz(circuit.ops):
            one_qubit = len(op.targets) == 1
            if one_qubit and not op.is_parametric:
                q = op.targets[0]
                pending[q] = _fixed_matrix(op) @ pending.get(q, np.eye(2, dtype=complex))
                continue
            flush(op.targets)
            if op.gate in ("RZ", "RZZ"):
                add("diag", op)
            elif op.gate == "CNOT":
                add("cnot", op)
            else:
                add(op.gate, op)
        close()
        flush(sorted(pending))
        return cls(n, steps)

    def run(self, amps: np.ndarray, params: np.ndarray) -> np.ndarray:
        for step in self.steps:
            step.forward(amps, params)
        return amps


def _initial_amplitudes(n: int, initial, batch_shape=()) -> np.ndarray:
    if isinstance(initial, StateVector):
        base = initial.amplitudes
    elif isinstance(initial, (int, np.integer)):
        if not 0 <= initial < 1 << n:
            raise DomainError(f"basis index {initial} out of range for {n} qubits")
        base = np.zeros(1 << n, dtype=complex)
        base[initial] = 1.0
    else:
        base = np.asarray(initial, dtype=complex)
    if base.shape[-1] != 1 << n:
        raise ContractError(f"initial state has {base.shape[-1]} amplitudes, expected {1 << n}")
    return np.array(np.broadcast_to(base, tuple(batch_shape) + (1 << n,)), dtype=complex)


def _check_params(circuit: ParametricCircuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.shape[-1:] != (circuit.n_params,) and not (circuit.n_params == 0 and params.size == 0):
        raise ContractError(f"expected {circuit.n_params} parameters, got shape {params.shape}")
    return params


def simulate(circuit: ParametricCircuit, params, initial=0) -> np.ndarray:
    """Amplitudes of circuit(params)|initial>.

    ``params`` of shape ``(..., n_params)`` yields a matching batch of states.
    """
    params = _check_params(circuit, params)
    amps = _initial_amplitudes(circuit.n_qubits, initial, params.shape[:-1])
    return circuit.program.run(amps, params)


def prepare_state(circuit: ParametricCircuit, params, initial=0) -> StateVector:
    params = np.asarray(params, dtype=float)
    if params.ndim > 1:
        raise ContractError("prepare_state takes a single parameter vector")
    return StateVector(simulate(circuit, params, initial))


def energy_and_gradient(
    circuit: ParametricCircuit, params, op: PauliSum, initial=0
) -> tuple[float, np.ndarray]:
    """<op> and its exact gradient by the adjoint method."""
    params = _check_params(circuit, params)
    if params.ndim != 1:
        raise ContractError("gradients take a single parameter vector")
    compiled = op.compiled(circuit.n_qubits)
    psi = simulate(circuit, params, initial)
    lam = compiled.apply(psi)
    energy = float(np.vdot(psi, lam).real)
    grad = np.zeros(circuit.n_params)
    for step in reversed(circuit.program.steps):
        if step.parametric:
            step.accumulate(lam, psi, grad)
        step.inverse(psi, params)
        step.inverse(lam, params)
    return energy, grad


def circuit_gradient(initial, circuit: ParametricCircuit, params, op: PauliSum) -> np.ndarray:
    return energy_and_gradient(circuit, params, op, initial)[1]


# --------------------------------------------------------------------------
# reference path: gate by gate, no fusion


def simulate_reference(circuit: ParametricCircuit, params, initial=0, offsets: dict[int, float] | None = None) -> np.ndarray:
    """Plain gate-by-gate simulation; ``offsets`` shifts the angle of individual ops."""
    params = _check_params(circuit, params)
    amps = _initial_amplitudes(circuit.n_qubits, initial)
    offsets = offsets or {}
    for i, op in enumerate(circuit.ops):
        angle = op.angle_from(params) if op.gate in PARAMETRIC else None
        if i in offsets:
            angle = angle + offsets[i]
        apply_gate_array(amps, op.gate, op.targets, angle)
    return amps


def parameter_shift_gradient(initial, circuit: ParametricCircuit, params, op: PauliSum) -> np.ndarray:
    """Two-term shift rule per bound gate, summed into slots; 2 evaluations per gate."""
    params = _check_params(circuit, params)
    compiled = op.compiled(circuit.n_qubits)
    grad = np.zeros(circuit.n_params)
    for i, gate in enumerate(circuit.ops):
        if gate.slot is None:
            continue
        plus = simulate_reference(circuit, params, initial, {i: np.pi / 2})
        minus = simulate_reference(circuit, params, initial, {i: -np.pi / 2})
        diff = compiled.expectation_raw(plus).real - compiled.expectation_raw(minus).real
        grad[gate.slot] += gate.multiplier * diff / 2
    return grad
