import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakvalues import (
    Basis,
    Observable,
    StateVector,
    UnitaryMatrix,
    ValidationError,
    apply,
    impulsive_kick,
    inner,
    projector_observable,
)
from weakvalues.qcore import identity_observable
from weakvalues.scenarios import spin_basis

from .conftest import random_state, random_unitary

PAULI_X = np.array([[0, 1], [1, 0]])


def test_inner_orthonormal_basis_states():
    e1, e2 = StateVector.basis_state(2, 0), StateVector.basis_state(2, 1)
    assert inner(e1, e1) == 1
    assert inner(e1, e2) == 0


def test_inner_z_up_with_equatorial_spinor():
    n_plus = spin_basis(math.pi / 2, 0.0)[0]
    z_plus = StateVector([1, 0])
    assert abs(inner(z_plus, n_plus) - 0.7071067811865476) < 1e-15


def test_inner_conjugates_first_argument():
    a = StateVector([1j, 0])
    b = StateVector([1, 0])
    assert inner(a, b) == -1j


def test_inner_dimension_mismatch():
    with pytest.raises(ValidationError):
        inner(StateVector([1, 0]), StateVector([1, 0, 0]))


def test_apply_identity_and_flip():
    s = StateVector([0.6, 0.8j])
    assert apply(UnitaryMatrix.identity(2), s) == s
    flipped = apply(UnitaryMatrix(PAULI_X), StateVector([1, 0]))
    np.testing.assert_array_equal(flipped.data, [0, 1])


def test_apply_composition():
    rng = np.random.default_rng(3)
    u1, u2 = UnitaryMatrix(random_unitary(rng, 4)), UnitaryMatrix(random_unitary(rng, 4))
    s = StateVector(random_state(rng, 4))
    np.testing.assert_allclose(apply(u2 @ u1, s).data, apply(u2, apply(u1, s)).data, atol=1e-12)


def test_state_normalization_rules():
    assert abs(np.linalg.norm(StateVector([1 + 1e-8, 0]).data) - 1) < 1e-15
    with pytest.raises(ValidationError, match="norm"):
        StateVector([1.001, 0])
    with pytest.raises(ValidationError):
        StateVector([np.nan, 1])
    with pytest.raises(ValidationError):
        StateVector(np.ones(17) / math.sqrt(17))


def test_state_is_immutable():
    s = StateVector([1, 0])
    with pytest.raises(ValueError):
        s.data[0] = 0


def test_unitarity_rejection():
    with pytest.raises(ValidationError, match="not unitary"):
        UnitaryMatrix([[1, 0], [0, 1 + 1e-6]])
    UnitaryMatrix([[1, 0], [0, 1 + 1e-10]])
    with pytest.raises(ValidationError, match="square"):
        UnitaryMatrix(np.ones((2, 3)))


def test_basis_rejects_non_orthogonal():
    with pytest.raises(ValidationError, match="orthonormal"):
        Basis([[1, 0], [1 / math.sqrt(2), 1 / math.sqrt(2)]])


def test_projector_observable():
    b = Basis.computational(2)
    np.testing.assert_array_equal(projector_observable(b, 0).eigenvalues, [1, 0])
    with pytest.raises(ValidationError):
        projector_observable(b, 2)


def test_union_projector_and_completeness():
    b = Basis.computational(3)
    np.testing.assert_array_equal(projector_observable(b, (0, 1)).eigenvalues, [1, 1, 0])
    total = sum((projector_observable(b, j) for j in range(1, 3)), projector_observable(b, 0))
    np.testing.assert_array_equal(total.eigenvalues, identity_observable(b).eigenvalues)


def test_impulsive_kick():
    b = Basis.computational(2)
    np.testing.assert_allclose(impulsive_kick(Observable(b, [0, 0])).data, np.eye(2), atol=0)
    np.testing.assert_allclose(impulsive_kick(Observable(b, [math.pi] * 2)).data, -np.eye(2), atol=1e-15)
    np.testing.assert_allclose(
        impulsive_kick(Observable(b, [0.1, 0])).data, np.diag([np.exp(-0.1j), 1]), atol=1e-16
    )


def test_kick_in_rotated_basis_matches_matrix_exponential():
    from scipy.linalg import expm

    rng = np.random.default_rng(5)
    b = Basis(list(random_unitary(rng, 3).T))
    v = Observable(b, [0.3, -1.2, 2.0])
    np.testing.assert_allclose(impulsive_kick(v).data, expm(-1j * v.matrix), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_norm_preservation_and_completeness(n, seed):
    rng = np.random.default_rng(seed)
    u = UnitaryMatrix(random_unitary(rng, n))
    s = StateVector(random_state(rng, n))
    assert abs(np.linalg.norm(apply(u, s).data) - 1) < 1e-12
    basis = Basis(list(random_unitary(rng, n).T))
    assert abs(np.sum(np.abs(basis.coefficients(s)) ** 2) - 1) < 1e-12
