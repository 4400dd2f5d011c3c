import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PAULI, embed, free_fermion_ground_energy
from tfim_vqe.errors import DomainError
from tfim_vqe.lattice import Lattice, TfimParams, build_lattice, build_tfim, chain, extents_for
from tfim_vqe.pauli import parity_x


def dense_tfim(n, pairs, h, j_z=-1.0):
    mat = sum(j_z * embed(n, {a: PAULI["Z"], b: PAULI["Z"]}) for a, b in pairs)
    return mat + sum(h * embed(n, {i: PAULI["X"]}) for i in range(n))


def test_chain_bonds():
    assert [(b.site_a, b.site_b) for b in chain(4).bonds()] == [(0, 1), (1, 2), (2, 3), (3, 0)]


def test_two_site_chain_keeps_both_bonds_unless_deduped():
    assert len(chain(2).bonds()) == 2
    assert len(chain(2).bonds(dedupe=True)) == 1


def test_square_lattice_bonds():
    lat = build_lattice(2, (3, 3))
    found = {(b.site_a, b.site_b, b.axis) for b in lat.bonds()}
    assert len(found) == 18
    assert (2, 0, 0) in found and (6, 0, 1) in found and (4, 7, 1) in found
    assert len(build_lattice(2, (2, 2)).bonds(dedupe=True)) == 4


def test_site_index_wraps_and_inverts():
    lat = Lattice(3, (2, 3, 4))
    for site in range(lat.n_sites):
        assert lat.site_index(lat.coords(site)) == site
    assert lat.site_index((1, 2, 3)) == 1 + 2 * (2 + 3 * 3)
    assert lat.site_index((3, -1, 4)) == lat.site_index((1, 2, 0))


@pytest.mark.parametrize("dims, extents", [(4, (2, 2, 2, 2)), (2, (3,)), (1, (1,)), (2, (3, 0))])
def test_invalid_lattices(dims, extents):
    with pytest.raises(DomainError):
        Lattice(dims, extents)


def test_invalid_couplings():
    with pytest.raises(DomainError):
        TfimParams(-0.5)
    with pytest.raises(DomainError):
        TfimParams(float("inf"))


def test_extents_prefer_even_balanced_splits():
    assert extents_for(12, 2) == (2, 6)
    assert extents_for(12, 3) == (2, 2, 3)
    assert extents_for(8, 3) == (2, 2, 2)
    assert extents_for(9, 2) == (3, 3)
    with pytest.raises(DomainError):
        extents_for(7, 2)


@pytest.mark.parametrize("extents", [(5,), (2, 3), (2, 2, 2)])
def test_hamiltonian_matches_dense_construction(extents):
    lat = Lattice(len(extents), extents)
    pairs = [(b.site_a, b.site_b) for b in lat.bonds()]
    h = build_tfim(lat, TfimParams(0.7, -1.3))
    expected = dense_tfim(lat.n_sites, pairs, 0.7, -1.3)
    np.testing.assert_allclose(h.to_sparse(lat.n_sites).toarray(), expected, atol=1e-12)


@given(n=st.sampled_from([4, 6, 8]), h=st.floats(0.0, 3.0))
def test_chain_ground_energy_matches_free_fermions(n, h):
    mat = build_tfim(chain(n), TfimParams(h)).to_sparse(n).toarray()
    assert np.linalg.eigvalsh(mat)[0] == pytest.approx(free_fermion_ground_energy(n, h), abs=1e-9)


def test_free_fermion_formula_sanity():
    assert free_fermion_ground_energy(10, 0.0) == pytest.approx(-10.0)
    assert free_fermion_ground_energy(10, 1.0) == pytest.approx(-12.784906443, abs=1e-8)


@pytest.mark.parametrize("extents", [(6,), (2, 3)])
def test_hamiltonian_commutes_with_parity(extents):
    lat = Lattice(len(extents), extents)
    n = lat.n_sites
    h = build_tfim(lat, TfimParams(1.1)).to_sparse(n).toarray()
    p = parity_x(n).to_sparse(n).toarray()
    np.testing.assert_allclose(h @ p, p @ h, atol=1e-12)
