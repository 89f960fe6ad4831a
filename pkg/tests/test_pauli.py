import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modbound import pauli
from modbound.errors import InvalidInputError
from oracles import expm_generator

finite = st.floats(-10, 10, allow_nan=False)
vectors = st.tuples(finite, finite, finite).map(np.array)
unit_vectors = vectors.filter(lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: v / np.linalg.norm(v))


@pytest.mark.parametrize("index, expected", [
    (1, [[0, 1], [1, 0]]),
    (2, [[0, -1j], [1j, 0]]),
    (3, [[1, 0], [0, -1]]),
])
def test_pauli_matrices(index, expected):
    np.testing.assert_array_equal(pauli.pauli_matrix(index), np.array(expected, complex))


@pytest.mark.parametrize("bad", [0, 4, -1, 1.5])
def test_pauli_matrix_rejects_index(bad):
    with pytest.raises(InvalidInputError):
        pauli.pauli_matrix(bad)


def test_generator_cases():
    np.testing.assert_array_equal(pauli.generator([1, 0, 0], 0.0), pauli.pauli_matrix(1))
    np.testing.assert_array_equal(pauli.generator([0, 0, 0], 2.0), 2 * np.eye(2))
    np.testing.assert_allclose(pauli.generator([0.5, 0, 0]), 0.5 * pauli.pauli_matrix(1))
    assert pauli.is_hermitian(pauli.generator([0.3, -1.2, 2.0], 0.7))


def test_decompose_roundtrip():
    k0, kappa = pauli.decompose(pauli.generator([0.3, -1.2, 2.0], 0.7))
    assert k0 == pytest.approx(0.7)
    np.testing.assert_allclose(kappa, [0.3, -1.2, 2.0])


def test_eigenket_examples():
    np.testing.assert_allclose(pauli.eigenket([0, 0, 1], 1), [1, 0], atol=1e-15)
    np.testing.assert_allclose(pauli.eigenket([0, 0, 1], -1), [0, 1], atol=1e-15)
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(pauli.eigenket([0, 1, 0], 1), [r, 1j * r], atol=1e-15)


def test_eigenket_rejects_non_unit():
    with pytest.raises(InvalidInputError):
        pauli.eigenket([0, 0, 2], 1)
    with pytest.raises(InvalidInputError):
        pauli.eigenket([0, 0, 1], 0)


@given(unit_vectors, st.sampled_from([1, -1]))
def test_eigenket_is_eigenvector(u, sign):
    v = pauli.eigenket(u, sign)
    np.testing.assert_allclose(pauli.dot_sigma(u) @ v, sign * v, atol=1e-12)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    first = v[np.argmax(np.abs(v) > 1e-8)]
    assert first.imag == pytest.approx(0.0, abs=1e-15) and first.real > 0


@given(unit_vectors, st.sampled_from([1, -1]))
def test_bloch_of_eigenket(u, sign):
    np.testing.assert_allclose(pauli.bloch_vector(pauli.eigenket(u, sign)), sign * u, atol=1e-10)


@given(unit_vectors, st.sampled_from([1, -1]))
def test_eigenket_deterministic(u, sign):
    assert pauli.eigenket(u, sign).tobytes() == pauli.eigenket(u, sign).tobytes()


def test_bloch_vector_examples():
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(pauli.bloch_vector([1, 0]), [0, 0, 1])
    # direct expectation values <psi|sigma_k|psi>
    for psi, expected in (([r, 1j * r], [0, 1, 0]), ([r, r], [1, 0, 0])):
        psi = np.array(psi)
        direct = [np.vdot(psi, s @ psi).real for s in pauli.SIGMA]
        np.testing.assert_allclose(direct, expected, atol=1e-15)
        np.testing.assert_allclose(pauli.bloch_vector(psi), expected, atol=1e-15)


@given(vectors, vectors)
def test_pauli_product_identity(a, b):
    lhs = pauli.dot_sigma(a) @ pauli.dot_sigma(b)
    rhs = np.dot(a, b) * np.eye(2) + 1j * pauli.dot_sigma(np.cross(a, b))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + np.linalg.norm(a) * np.linalg.norm(b)))


def test_pauli_exp_examples():
    np.testing.assert_allclose(pauli.pauli_exp([math.pi / 2, 0, 0], 0, 1), 1j * pauli.pauli_matrix(1),
                               atol=1e-15)
    np.testing.assert_array_equal(pauli.pauli_exp([0, 0, 0], 0, 5), np.eye(2))
    np.testing.assert_allclose(pauli.pauli_exp([1, 0, 0], 0, math.pi), -np.eye(2), atol=1e-15)


def test_pauli_exp_negative_step_rejected():
    with pytest.raises(InvalidInputError):
        pauli.pauli_exp([1, 0, 0], 0, -1)


@given(vectors, finite, st.floats(0, 5))
def test_pauli_exp_matches_expm(kappa, k0, h):
    U = pauli.pauli_exp(kappa, k0, h)
    assert pauli.unitarity_residual(U) <= 1e-12
    np.testing.assert_allclose(U, expm_generator(kappa, k0, h), atol=1e-10)


def test_pauli_exp_small_angle_branch():
    kappa = np.array([1e-10, 2e-10, -3e-11])
    np.testing.assert_allclose(pauli.pauli_exp(kappa, 0, 1.0), expm_generator(kappa, 0, 1.0), atol=1e-18)


def test_tagged_constructors():
    pauli.hermitian(pauli.generator([1, 2, 3], 1))
    with pytest.raises(InvalidInputError):
        pauli.hermitian([[0, 1], [0, 0]])
    pauli.unitary(pauli.pauli_exp([1, 2, 3], 0.5, 0.3))
    with pytest.raises(InvalidInputError):
        pauli.unitary(2 * np.eye(2))
    with pytest.raises(InvalidInputError):
        pauli.as_ket([1, 1])
    assert np.linalg.norm(pauli.ket(3, 4j)) == pytest.approx(1.0, abs=1e-15)
