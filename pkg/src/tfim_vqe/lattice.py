"""Periodic hypercubic lattices and the transverse-field Ising Hamiltonian.

    H = J_z sum_<ij> Z_i Z_j + h_x sum_i X_i

with the ferromagnetic default J_z = -1 and the field along +x, so the
large-field ground state is the product of |-> states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from operator import mul

import numpy as np

from .errors import DomainError
from .pauli import PauliString, PauliSum


@dataclass(frozen=True)
class Bond:
    site_a: int
    site_b: int
    axis: int


@dataclass(frozen=True)
class Lattice:
    dims: int
    extents: tuple[int, ...]
    periodic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(e) for e in self.extents))
        if self.dims not in (1, 2, 3):
            raise DomainError(f"dims must be 1, 2 or 3, got {self.dims}")
        if len(self.extents) != self.dims:
            raise DomainError(f"{self.dims}-D lattice needs {self.dims} extents, got {self.extents}")
        if any(e < 2 for e in self.extents):
            raise DomainError(f"every extent must be >= 2, got {self.extents}")
        if not self.periodic:
            raise DomainError("only periodic boundaries are supported")

    @property
    def n_sites(self) -> int:
        return reduce(mul, self.extents, 1)

    def site_index(self, coords) -> int:
        """Row-major linearization: x + Lx * (y + Ly * z)."""
        idx = 0
        for c, e in zip(reversed(coords), reversed(self.extents)):
            idx = idx * e + (c % e)
        return idx

    def coords(self, site: int) -> tuple[int, ...]:
        out = []
        for e in self.extents:
            out.append(site % e)
            site //= e
        return tuple(out)

    def bonds(self, dedupe: bool = False) -> list[Bond]:
        return list(self._bonds_dedupe if dedupe else self._bonds_all)

    @cached_property
    def _bonds_all(self) -> tuple[Bond, ...]:
        out = []
        for site in range(self.n_sites):
            c = self.coords(site)
            for axis in range(self.dims):
                nb = list(c)
                nb[axis] += 1
                out.append(Bond(site, self.site_index(nb), axis))
        return tuple(out)

    @cached_property
    def _bonds_dedupe(self) -> tuple[Bond, ...]:
        seen = set()
        out = []
        for b in self._bonds_all:
            key = (min(b.site_a, b.site_b), max(b.site_a, b.site_b))
            if key in seen:
                continue
            seen.add(key)
            out.append(b)
        return tuple(out)


def build_lattice(dims: int, extents) -> Lattice:
    return Lattice(int(dims), tuple(extents))


def bonds(lattice: Lattice, dedupe: bool = False) -> list[Bond]:
    return lattice.bonds(dedupe)


def chain(n: int) -> Lattice:
    return Lattice(1, (n,))


@dataclass(frozen=True)
class TfimParams:
    h_x: float
    j_z: float = -1.0

    def __post_init__(self):
        if not (np.isfinite(self.h_x) and np.isfinite(self.j_z)):
            raise DomainError("TFIM couplings must be finite")
        if self.h_x < 0:
            raise DomainError(f"h_x must be >= 0, got {self.h_x}")


def tfim_from_bonds(n_sites: int, bond_pairs, h_x: float, j_z: float = -1.0) -> PauliSum:
    terms = [PauliString(j_z, ((a, "Z"), (b, "Z"))) for a, b in bond_pairs]
    terms += [PauliString(h_x, ((i, "X"),)) for i in range(n_sites)]
    return PauliSum(tuple(terms))


def build_tfim(lattice: Lattice, params: TfimParams, dedupe: bool = False) -> PauliSum:
    """One ``j_z Z Z`` term per bond and one ``h_x X`` term per site."""
    pairs = [(b.site_a, b.site_b) for b in lattice.bonds(dedupe)]
    return tfim_from_bonds(lattice.n_sites, pairs, params.h_x, params.j_z)


def extents_for(n_sites: int, dims: int) -> tuple[int, ...]:
    """A factorization of ``n_sites`` into ``dims`` extents >= 2.

    Prefers an even extent first (keeps the two-colourable wrap that the HVA
    depth formula assumes), then the most balanced split.
    """
    if dims == 1:
        if n_sites < 2:
            raise DomainError("a chain needs at least 2 sites")
        return (n_sites,)
    best = None
    for first in range(2, n_sites + 1):
        if n_sites % first:
            continue
        try:
            rest = extents_for(n_sites // first, dims - 1)
        except DomainError:
            continue
        cand = tuple(sorted((first,) + rest))
        key = (sum(e % 2 for e in cand), max(cand) - min(cand), cand)
        if best is None or key < best[0]:
            best = (key, cand)
    if best is None:
        raise DomainError(f"{n_sites} sites cannot form a {dims}-D lattice with extents >= 2")
    return best[1]
