"""Pauli strings and weighted sums of them acting on dense statevectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, DomainError

_LABELS = ("X", "Y", "Z")


@dataclass(frozen=True)
class PauliString:
    """``coefficient * prod_q P_q``; qubits absent from ``factors`` carry the identity."""

    coefficient: float
    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        coeff = float(self.coefficient)
        if not np.isfinite(coeff):
            raise DomainError(f"non-finite Pauli coefficient {self.coefficient!r}")
        items = self.factors.items() if isinstance(self.factors, Mapping) else self.factors
        seen = {}
        for q, label in items:
            q = int(q)
            if q < 0:
                raise DomainError(f"negative qubit index {q}")
            if label not in _LABELS:
                raise DomainError(f"unknown Pauli label {label!r}")
            if q in seen:
                raise DomainError(f"qubit {q} appears twice in one Pauli string")
            seen[q] = label
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(self, "factors", tuple(sorted(seen.items())))

    @classmethod
    def from_label(cls, label: str, coefficient: float = 1.0) -> "PauliString":
        """Parse ``"X0 Z1"``-style labels; ``""`` or ``"I"`` is the identity."""
        factors = []
        for tok in label.split():
            if tok == "I":
                continue
            factors.append((int(tok[1:]), tok[0]))
        return cls(coefficient, tuple(factors))

    @property
    def max_qubit(self) -> int:
        return max((q for q, _ in self.factors), default=-1)

    @property
    def masks(self) -> tuple[int, int, int]:
        """(x_mask, z_mask, number of Y factors) with P = i^ny X^x Z^z."""
        x = z = ny = 0
        for q, label in self.factors:
            if label in "XY":
                x |= 1 << q
            if label in "YZ":
                z |= 1 << q
            ny += label == "Y"
        return x, z, ny

    def __str__(self):
        body = " ".join(f"{p}{q}" for q, p in self.factors) or "I"
        return f"{self.coefficient:+g} {body}"


@dataclass(frozen=True)
class PauliSum:
    terms: tuple[PauliString, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, str]]) -> "PauliSum":
        return cls(tuple(PauliString.from_label(lbl, c) for c, lbl in terms))

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(tuple(PauliString(t.coefficient * factor, t.factors) for t in self.terms))

    @property
    def min_qubits(self) -> int:
        return 1 + max((t.max_qubit for t in self.terms), default=-1)

    @cached_property
    def _groups(self) -> dict[int, list[tuple[int, complex]]]:
        groups: dict[int, list[tuple[int, complex]]] = {}
        for t in self.terms:
            x, z, ny = t.masks
            groups.setdefault(x, []).append((z, t.coefficient * (1j) ** ny))
        return groups

    def compiled(self, n: int) -> "CompiledOperator":
        if self.min_qubits > n:
            raise DomainError(
                f"operator acts on qubit {self.min_qubits - 1} but the state has {n} qubits"
            )
        cache = self.__dict__.setdefault("_compiled", {})
        if n not in cache:
            cache[n] = CompiledOperator(self, n)
        return cache[n]

    def to_sparse(self, n: int) -> sp.csr_matrix:
        return self.compiled(n).to_sparse()

    def __str__(self):
        return "\n".join(str(t) for t in self.terms)


class CompiledOperator:
    """Operator as ``sum_x D_x * shift_x``: out[j] = sum_x D_x[j] * psi[j ^ x].

    Terms sharing an X-mask collapse into one diagonal, so a TFIM Hamiltonian
    becomes one diagonal (all ZZ terms) plus one shifted copy per site.
    """

    def __init__(self, op: PauliSum, n: int):
        self.source = op
        self.n = n
        dim = 1 << n
        idx = np.arange(dim)
        self.blocks: list[tuple[int, np.ndarray | None, np.ndarray]] = []
        for x, parts in sorted(op._groups.items()):
            diag = np.zeros(dim, dtype=complex)
            src = idx ^ x
            for z, c in parts:
                diag += c * (1 - 2 * (np.bitwise_count(src & z) & 1).astype(np.int64))
            if np.all(diag.imag == 0):
                diag = diag.real.copy()
            self.blocks.append((x, None if x == 0 else src, diag))

    @cached_property
    def is_real(self) -> bool:
        return all(not np.iscomplexobj(d) for _, _, d in self.blocks)

    def apply(self, amps: np.ndarray) -> np.ndarray:
        # real operators keep real input real (used by the Lanczos oracle)
        dtype = float if self.is_real and not np.iscomplexobj(amps) else complex
        out = np.zeros(amps.shape, dtype=dtype)
        for _, src, diag in self.blocks:
            out += diag * (amps if src is None else amps[..., src])
        return out

    def expectation_raw(self, amps: np.ndarray) -> complex:
        total = 0j
        for _, src, diag in self.blocks:
            shifted = amps if src is None else amps[src]
            total += np.vdot(amps, diag * shifted)
        return total

    def to_sparse(self) -> sp.csr_matrix:
        dim = 1 << self.n
        rows, cols, vals = [], [], []
        idx = np.arange(dim)
        for x, src, diag in self.blocks:
            rows.append(idx)
            cols.append(idx if src is None else src)
            vals.append(diag)
        dtype = float if self.is_real else complex
        mat = sp.csr_matrix(
            (np.concatenate(vals).astype(dtype), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        )
        mat.sum_duplicates()
        return mat


def check_qubits(op: PauliSum, n: int) -> None:
    if op.min_qubits > n:
        raise DomainError(f"operator acts on qubit {op.min_qubits - 1} but the state has {n} qubits")


def single(label: str, qubit: int, coefficient: float = 1.0) -> PauliSum:
    return PauliSum((PauliString(coefficient, ((qubit, label),)),))


def identity(coefficient: float = 1.0) -> PauliSum:
    return PauliSum((PauliString(coefficient, ()),))


def parity_x(n: int) -> PauliSum:
    """Global spin-flip operator prod_i X_i."""
    if n < 1:
        raise ContractError("parity needs at least one qubit")
    return PauliSum((PauliString(1.0, tuple((q, "X") for q in range(n))),))
