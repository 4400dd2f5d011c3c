import numpy as np
import pytest

from conftest import free_fermion_ground_energy
from tfim_vqe import oracle
from tfim_vqe.errors import CapacityError, ContractError, OracleError
from tfim_vqe.lattice import Lattice, TfimParams, build_tfim, chain
from tfim_vqe.oracle import (
    lowest_eigenpairs,
    parity_resolved_ground,
    parity_value,
    toy_circuit,
    toy_energy_curve,
)
from tfim_vqe.pauli import parity_x


def sector_energies(h, n):
    """Lowest level in each parity sector from projected dense matrices."""
    mat = h.to_sparse(n).toarray()
    p = parity_x(n).to_sparse(n).toarray()
    shift = 10 * np.abs(mat).sum()
    out = {}
    for sign in (1, -1):
        proj = (np.eye(1 << n) + sign * p) / 2
        out[sign] = np.linalg.eigvalsh(proj @ mat @ proj + shift * (np.eye(1 << n) - proj))[0]
    return out


@pytest.mark.parametrize("n", [4, 6, 8, 10])
@pytest.mark.parametrize("h", [0.0, 0.3, 1.0, 1.7])
def test_dense_ground_energy_matches_free_fermions(n, h):
    pairs = lowest_eigenpairs(build_tfim(chain(n), TfimParams(h)), n)
    assert pairs[0].value == pytest.approx(free_fermion_ground_energy(n, h), abs=1e-9)


@pytest.mark.parametrize("n", [8, 10, 12])
def test_lanczos_agrees_with_dense(n):
    h = build_tfim(chain(n), TfimParams(0.9))
    dense = lowest_eigenpairs(h, n, 3, "dense")
    iterative = lowest_eigenpairs(h, n, 3, "lanczos")
    for a, b in zip(dense, iterative):
        assert a.value == pytest.approx(b.value, abs=1e-9)
    assert abs(np.vdot(dense[0].vector.amplitudes, iterative[0].vector.amplitudes)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.slow
def test_lanczos_at_fourteen_sites_matches_free_fermions():
    h = build_tfim(chain(14), TfimParams(1.0))
    assert lowest_eigenpairs(h, 14, 1, "lanczos")[0].value == pytest.approx(
        free_fermion_ground_energy(14, 1.0), abs=1e-8
    )


def test_known_energies():
    h10 = build_tfim(chain(10), TfimParams(1.0))
    assert lowest_eigenpairs(h10, 10)[0].value == pytest.approx(-12.784906443, abs=1e-8)
    h10 = build_tfim(chain(10), TfimParams(2.0))
    assert lowest_eigenpairs(h10, 10)[0].value == pytest.approx(-21.2712088, abs=1e-6)


def test_argument_and_capacity_errors():
    h = build_tfim(chain(4), TfimParams(1.0))
    with pytest.raises(ContractError):
        lowest_eigenpairs(h, 4, 0)
    with pytest.raises(ContractError):
        lowest_eigenpairs(h, 4, 17)
    with pytest.raises(ContractError):
        lowest_eigenpairs(h, 4, 1, "qr")
    big = build_tfim(chain(21), TfimParams(1.0))
    with pytest.raises(CapacityError):
        lowest_eigenpairs(big, 15, 1, "dense")
    with pytest.raises(CapacityError):
        lowest_eigenpairs(big, 21, 1, "lanczos")


def test_residual_check_rejects_bad_pairs(monkeypatch):
    good = oracle._dense

    def shifted(h, n, k):
        values, vectors = good(h, n, k)
        return values + 1e-3, vectors

    monkeypatch.setattr(oracle, "_dense", shifted)
    with pytest.raises(OracleError):
        lowest_eigenpairs(build_tfim(chain(4), TfimParams(1.0)), 4)


def test_zero_field_doublet_resolves_into_cat_states():
    res = parity_resolved_ground(build_tfim(chain(6), TfimParams(0.0)), 6)
    cat = np.zeros(64)
    cat[0] = cat[63] = 1 / np.sqrt(2)
    assert abs(np.vdot(cat, res.even.vector.amplitudes)) == pytest.approx(1.0)
    cat[63] *= -1
    assert abs(np.vdot(cat, res.odd.vector.amplitudes)) == pytest.approx(1.0)
    assert res.gap == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("extents, h", [((6,), 0.4), ((8,), 1.2), ((2, 3), 2.0), ((3, 3), 1.0)])
def test_sector_energies_match_projected_matrices(extents, h):
    lat = Lattice(len(extents), extents)
    n = lat.n_sites
    ham = build_tfim(lat, TfimParams(h))
    res = parity_resolved_ground(ham, n)
    expected = sector_energies(ham, n)
    assert res.even.value == pytest.approx(expected[1], abs=1e-9)
    assert res.odd.value == pytest.approx(expected[-1], abs=1e-9)
    assert parity_value(res.even.vector.amplitudes) == pytest.approx(1.0)
    assert parity_value(res.odd.vector.amplitudes) == pytest.approx(-1.0)


def test_odd_torus_ground_state_is_parity_odd():
    lat = Lattice(2, (3, 3))
    assert parity_resolved_ground(build_tfim(lat, TfimParams(2.0)), 9).ground_parity == -1


def test_gap_closes_exponentially_in_ordered_phase():
    gaps = [parity_resolved_ground(build_tfim(chain(n), TfimParams(0.5)), n).gap for n in (6, 8, 10, 12)]
    ratios = np.array(gaps[1:]) / np.array(gaps[:-1])
    assert np.all(ratios < 0.5)
    assert np.ptp(np.log(ratios)) < 0.2


def test_toy_curves():
    grid = np.linspace(-np.pi, np.pi, 100)
    np.testing.assert_allclose(toy_energy_curve(1, grid), 0.0, atol=1e-12)
    np.testing.assert_allclose(toy_energy_curve(2, grid), np.sin(grid), atol=1e-12)
    with pytest.raises(ContractError):
        toy_circuit(3)
