"""Ansatz builders (HEA, HVA, HVA-SB) and resource accounting."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .circuit import Op, ParametricCircuit
from .errors import DomainError
from .lattice import Lattice

ENTANGLEMENT_PATTERNS = ("pairwise_full", "full", "linear", "circular")


class AnsatzKind(str, Enum):
    HEA = "HEA"
    HVA = "HVA"
    HVA_SB = "HVA_SB"

    @classmethod
    def parse(cls, value) -> "AnsatzKind":
        if isinstance(value, cls):
            return value
        key = str(value).upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            raise DomainError(f"unknown ansatz kind {value!r}") from None


@dataclass(frozen=True)
class AnsatzSpec:
    kind: AnsatzKind
    n_layers: int
    real_amplitudes: bool = False
    entanglement: str = "pairwise_full"

    def __post_init__(self):
        object.__setattr__(self, "kind", AnsatzKind.parse(self.kind))
        if self.n_layers < 1:
            raise DomainError(f"n_layers must be >= 1, got {self.n_layers}")
        if self.kind is AnsatzKind.HEA and self.entanglement not in ENTANGLEMENT_PATTERNS:
            raise DomainError(f"unknown entanglement pattern {self.entanglement!r}")

    def build(self, lattice: Lattice, dedupe: bool = False) -> ParametricCircuit:
        if self.kind is AnsatzKind.HEA:
            return build_hea(lattice.n_sites, self.n_layers, self.real_amplitudes, self.entanglement)
        if self.kind is AnsatzKind.HVA:
            return build_hva(lattice, self.n_layers, dedupe)
        return build_hva_sb(lattice, self.n_layers, dedupe)


@dataclass(frozen=True)
class ResourceEstimate:
    n_params: int
    n_cnots: int
    depth: int


def entangling_pairs(n_qubits: int, pattern: str) -> list[tuple[int, int]]:
    """CNOT (control, target) pairs of one HEA entangling block.

    ``pairwise_full`` sweeps every ordered pair twice, giving 2 N (N-1) CNOTs
    per layer. ``full`` is the i < j sweep, ``linear`` the nearest-neighbour
    chain and ``circular`` the chain plus the (N-1, 0) wrap, applied first.
    """
    n = n_qubits
    if pattern == "pairwise_full":
        return [(i, j) for i in range(n) for j in range(n) if i != j] * 2
    if pattern == "full":
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    if pattern == "linear":
        return [(i, i + 1) for i in range(n - 1)]
    if pattern == "circular":
        return ([(n - 1, 0)] if n > 2 else []) + [(i, i + 1) for i in range(n - 1)]
    raise DomainError(f"unknown entanglement pattern {pattern!r}")


def build_hea(
    n_qubits: int, n_layers: int, real_amplitudes: bool = False, entanglement: str = "pairwise_full"
) -> ParametricCircuit:
    """Rotation block, then ``n_layers`` x (CNOT block, rotation block).

    A rotation block is RY on every qubit followed by RZ on every qubit (RY
    only when ``real_amplitudes``); every rotation owns a slot.
    """
    if n_qubits < 2:
        raise DomainError("HEA needs at least 2 qubits")
    if n_layers < 1:
        raise DomainError("HEA needs at least 1 layer")
    pairs = entangling_pairs(n_qubits, entanglement)
    axes = ("RY",) if real_amplitudes else ("RY", "RZ")
    ops: list[Op] = []
    slot = 0

    def rotations():
        nonlocal slot
        for gate in axes:
            for q in range(n_qubits):
                ops.append(Op(gate, (q,), slot))
                slot += 1

    rotations()
    for _ in range(n_layers):
        ops.extend(Op("CNOT", p) for p in pairs)
        rotations()
    return ParametricCircuit(n_qubits, tuple(ops))


def minus_state_block(n_qubits: int) -> list[Op]:
    """H then Z on every qubit: |0...0> -> |-...->."""
    return [op for q in range(n_qubits) for op in (Op("H", (q,)), Op("Z", (q,)))]


def rzz_decomposed(a: int, b: int, slot: int, multiplier: float = 1.0) -> list[Op]:
    return [Op("CNOT", (a, b)), Op("RZ", (b,), slot, multiplier), Op("CNOT", (a, b))]


def scheduled_bonds(lattice: Lattice, dedupe: bool = False) -> list[tuple[int, int]]:
    """Bond pairs ordered colour class by colour class, so each class is one circuit moment."""
    pairs = [(b.site_a, b.site_b) for b in lattice.bonds(dedupe)]
    colours = edge_colouring(pairs, lattice.n_sites)
    order = sorted(range(len(pairs)), key=lambda i: (colours[i], i))
    return [pairs[i] for i in order]


def _hva_layers(lattice: Lattice, n_layers: int, dedupe: bool, symmetry_breaking: bool) -> ParametricCircuit:
    n = lattice.n_sites
    bonds = scheduled_bonds(lattice, dedupe)
    per_layer = 3 if symmetry_breaking else 2
    ops = minus_state_block(n)
    for layer in range(n_layers):
        base = per_layer * layer
        for a, b in bonds:
            ops.extend(rzz_decomposed(a, b, base))
        ops.extend(Op("RX", (q,), base + 1) for q in range(n))
        if symmetry_breaking:
            ops.extend(Op("RZ", (q,), base + 2) for q in range(n))
    return ParametricCircuit(n, tuple(ops))


def build_hva(lattice: Lattice, n_layers: int, dedupe: bool = False) -> ParametricCircuit:
    """|->^N preparation, then per layer a shared-angle ZZ block on all bonds and a shared RX block."""
    if n_layers < 1:
        raise DomainError("HVA needs at least 1 layer")
    return _hva_layers(lattice, n_layers, dedupe, symmetry_breaking=False)


def build_hva_sb(lattice: Lattice, n_layers: int, dedupe: bool = False) -> ParametricCircuit:
    """HVA with a shared-angle RZ block on every site appended to each layer."""
    if n_layers < 1:
        raise DomainError("HVA-SB needs at least 1 layer")
    return _hva_layers(lattice, n_layers, dedupe, symmetry_breaking=True)


def resource_estimate(spec: AnsatzSpec, n_qubits: int, lattice_dim: int = 1) -> ResourceEstimate:
    """Closed-form parameter count, CNOT count and depth for the three families."""
    nl, nq, d = spec.n_layers, n_qubits, lattice_dim
    if spec.kind is AnsatzKind.HEA:
        return ResourceEstimate(2 * (nl + 1) * nq, 2 * nl * nq * (nq - 1), nl * (nq + 1) + 2)
    if spec.kind is AnsatzKind.HVA:
        return ResourceEstimate(2 * nl, 2 * d * nl * nq, (2 * d + 1) * nl + 1)
    return ResourceEstimate(3 * nl, 2 * d * nl * nq, 2 * (d + 1) * nl + 1)


def count_resources(circuit: ParametricCircuit) -> ResourceEstimate:
    """Count slots, CNOTs and depth of a concrete circuit.

    Depth is the longest dependency chain after two peephole merges: an
    adjacent ``CNOT(a,b) RZ(b) CNOT(a,b)`` counts as one two-qubit ZZ rotation,
    and consecutive fixed single-qubit gates on one qubit count as one gate.
    A native RZZ op counts as two CNOTs.
    """
    ops = circuit.ops
    slots = {op.slot for op in ops if op.slot is not None}
    n_cnots = sum(1 for op in ops if op.gate == "CNOT") + 2 * sum(1 for op in ops if op.gate == "RZZ")
    level = [0] * circuit.n_qubits
    last_fixed = [False] * circuit.n_qubits
    i = 0
    while i < len(ops):
        op = ops[i]
        step = 1
        if op.gate == "CNOT" and i + 2 < len(ops):
            mid, end = ops[i + 1], ops[i + 2]
            if end.gate == "CNOT" and end.targets == op.targets and mid.gate == "RZ" and mid.targets[0] == op.targets[1]:
                step = 3
        fixed_1q = len(op.targets) == 1 and op.slot is None
        if fixed_1q and last_fixed[op.targets[0]]:
            i += 1
            continue
        d = 1 + max(level[q] for q in op.targets)
        for q in op.targets:
            level[q] = d
            last_fixed[q] = fixed_1q
        i += step
    return ResourceEstimate(len(slots), n_cnots, max(level, default=0))


def edge_colouring(pairs: list[tuple[int, int]], n_vertices: int, budget: int = 20000) -> list[int]:
    """Proper edge colouring (parallel edges allowed) with as few colours as the search finds.

    Starts from the maximum degree and runs a most-constrained-first
    backtracking search; each failed or exhausted search adds one colour.
    """
    m = len(pairs)
    if m == 0:
        return []
    degree = [0] * n_vertices
    for a, b in pairs:
        degree[a] += 1
        degree[b] += 1
    k = max(degree)
    while True:
        found = _colour_search(pairs, n_vertices, k, budget)
        if found is not None:
            return found
        k += 1


def _colour_search(pairs, n_vertices, k, budget):
    m = len(pairs)
    colours = [-1] * m
    used = [set() for _ in range(n_vertices)]
    nodes = 0

    def pick():
        best, best_free = -1, None
        for e in range(m):
            if colours[e] >= 0:
                continue
            a, b = pairs[e]
            free = k - len(used[a] | used[b])
            if best_free is None or free < best_free:
                best, best_free = e, free
        return best

    def solve(n_done):
        nonlocal nodes
        if n_done == m:
            return True
        nodes += 1
        if nodes > budget:
            return False
        e = pick()
        a, b = pairs[e]
        taken = used[a] | used[b]
        top = max((c for c in colours if c >= 0), default=-1)
        for c in range(min(k, top + 2)):
            if c in taken:
                continue
            colours[e] = c
            used[a].add(c)
            used[b].add(c)
            if solve(n_done + 1):
                return True
            used[a].discard(c)
            used[b].discard(c)
            colours[e] = -1
        return False

    return list(colours) if solve(0) else None
