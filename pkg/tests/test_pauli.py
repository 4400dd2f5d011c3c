import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import pauli_matrix
from tfim_vqe.errors import DomainError
from tfim_vqe.pauli import PauliString, PauliSum, identity, parity_x, single

labels = st.sampled_from("XYZ")


@st.composite
def pauli_strings(draw, n):
    qubits = draw(st.lists(st.integers(0, n - 1), unique=True, max_size=n))
    factors = tuple((q, draw(labels)) for q in qubits)
    coeff = draw(st.floats(-3, 3, allow_nan=False))
    return PauliString(coeff, factors)


def test_from_label_sorts_and_parses():
    p = PauliString.from_label("Z3 X0 Y1", 2.5)
    assert p.factors == ((0, "X"), (1, "Y"), (3, "Z"))
    assert p.coefficient == 2.5
    assert p.max_qubit == 3
    assert PauliString.from_label("I").factors == ()


@pytest.mark.parametrize(
    "coeff, factors",
    [(1.0, ((0, "Q"),)), (1.0, ((0, "X"), (0, "Z"))), (1.0, ((-1, "X"),)), (float("nan"), ())],
)
def test_invalid_pauli_strings(coeff, factors):
    with pytest.raises(DomainError):
        PauliString(coeff, factors)


def test_masks():
    x, z, ny = PauliString.from_label("X0 Y1 Z2").masks
    assert (x, z, ny) == (0b011, 0b110, 1)


def test_identity_term_acts_as_scalar():
    op = identity(3.0)
    np.testing.assert_allclose(op.to_sparse(2).toarray(), 3.0 * np.eye(4))


@given(n=st.integers(1, 4), data=st.data())
def test_compiled_operator_matches_kronecker_products(n, data):
    terms = data.draw(st.lists(pauli_strings(n), min_size=1, max_size=5))
    op = PauliSum(tuple(terms))
    dense = sum(pauli_matrix(n, t.factors, t.coefficient) for t in terms)
    np.testing.assert_allclose(op.to_sparse(n).toarray(), dense, atol=1e-12)
    vec = np.random.default_rng(0).normal(size=1 << n) + 0j
    np.testing.assert_allclose(op.compiled(n).apply(vec), dense @ vec, atol=1e-12)


def test_batched_apply():
    op = PauliSum.from_terms([(0.5, "X0 Y1"), (-1.0, "Z1"), (2.0, "Y0")])
    rng = np.random.default_rng(3)
    batch = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    compiled = op.compiled(2)
    np.testing.assert_allclose(compiled.apply(batch), np.array([compiled.apply(v) for v in batch]))


def test_real_operator_keeps_real_vectors_real():
    op = PauliSum.from_terms([(1.0, "Z0 Z1"), (0.3, "X0")])
    assert op.compiled(2).is_real
    assert op.compiled(2).apply(np.ones(4)).dtype == float
    assert not PauliSum.from_terms([(1.0, "Y0")]).compiled(1).is_real


def test_compile_rejects_small_register():
    with pytest.raises(DomainError):
        single("X", 3).compiled(2)


def test_sum_and_scaling():
    a = single("Z", 0)
    b = single("X", 0, 2.0)
    total = (a + b).scaled(-1.0)
    np.testing.assert_allclose(total.to_sparse(1).toarray(), -np.array([[1, 2], [2, -1]]))
    assert total.min_qubits == 1


def test_parity_flips_every_bit():
    mat = parity_x(3).to_sparse(3).toarray()
    for j in range(8):
        assert mat[j ^ 7, j] == 1
