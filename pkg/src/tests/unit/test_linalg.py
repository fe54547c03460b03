import math

import numpy as np
import pytest

from tichain.core.errors import InvalidStateError
from tichain.core.linalg import (
    DensityMatrix,
    bloch_state,
    expectation,
    herm_eig,
    maximally_entangled,
    partial_trace,
    partial_transpose,
    pauli,
    pauli_product,
    product_state,
)


def test_pauli_algebra():
    """σy·σx = -iσz and every Pauli squares to the identity."""
    assert np.allclose(pauli("y") @ pauli("x"), -1j * pauli("z"))
    for axis in "xyz":
        assert np.allclose(pauli(axis) @ pauli(axis), np.eye(2))
    with pytest.raises(InvalidStateError):
        pauli("w")


def test_herm_eig_reconstructs_and_sorts(rng):
    """Eigenvalues are ascending and reproduce the matrix."""
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    H = A + A.conj().T
    values, vectors = herm_eig(H)
    assert np.all(np.diff(values) >= 0)
    assert np.allclose((vectors * values) @ vectors.conj().T, H)


def test_herm_eig_rejects_non_hermitian():
    """A non-Hermitian input is an invalid state."""
    with pytest.raises(InvalidStateError):
        herm_eig(np.array([[0, 1], [0, 0]]))


def test_density_matrix_validation():
    """Trace, Hermiticity and positivity are checked at construction."""
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(2), (2,))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.array([[1.5, 0], [0, -0.5]]), (2,))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.array([[0.5, 1j], [0, 0.5]]), (2,))
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(4) / 4, (2,))


def test_density_matrix_is_read_only():
    """Stored matrices cannot be modified after validation."""
    rho = DensityMatrix(np.eye(2) / 2, (2,))
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_partial_trace_of_product_state():
    """Tracing out one factor of a product returns the other factor."""
    a = bloch_state((0.3, 0.0, 0.4))
    b = bloch_state((0.0, -0.6, 0.0))
    c = bloch_state((0.0, 0.0, 1.0))
    rho = product_state(a, b, c)
    assert np.allclose(rho.marginal((1,)).matrix, b.matrix)
    assert np.allclose(rho.marginal((0, 2)).matrix, np.kron(a.matrix, c.matrix))
    assert np.allclose(partial_trace(rho.matrix, (2, 2, 2), (2,)), c.matrix)


def test_maximally_entangled_marginal_is_mixed():
    """The Bell state has maximally mixed single-site marginals."""
    phi = maximally_entangled(2)
    assert np.allclose(phi.marginal((0,)).matrix, np.eye(2) / 2)
    assert math.isclose(expectation(phi, pauli_product("z", "z")), 1.0)


def test_partial_transpose_detects_entanglement():
    """The Bell state has a negative partial-transpose eigenvalue."""
    phi = maximally_entangled(2)
    values, _ = herm_eig(partial_transpose(phi, 1))
    assert math.isclose(values[0], -0.5, abs_tol=1e-12)


def test_bloch_state_limits():
    """Pure states are allowed; vectors longer than one are not."""
    rho = bloch_state((1.0, 0.0, 0.0))
    assert math.isclose(rho.expectation(pauli("x")), 1.0)
    with pytest.raises(InvalidStateError):
        bloch_state((1.0, 1.0, 0.0))
