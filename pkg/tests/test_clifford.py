import numpy as np
import pytest
from numpy.testing import assert_allclose

from steklov.clifford import (ALPHA, BETA, GAMMA5, I4, SPIN, algebra_residuals, alpha_dot, anticommutator,
                              dagger, dirac_alpha, projector, spin_dot)
from steklov.shared.errors import ArgumentError


def test_algebra_identities_hold_to_machine_precision(rng):
    residuals = algebra_residuals(rng, samples=1000)
    assert set(residuals) >= {"clifford_anticommutation", "projector_algebra", "tangential_square"}
    for name, value in residuals.items():
        assert value <= 1e-13, name


def test_matrices_are_hermitian_and_square_to_identity():
    for a in list(ALPHA) + [BETA, GAMMA5]:
        assert_allclose(dagger(a), a)
        assert_allclose(a @ a, I4)


def test_gamma5_anticommutes_with_beta_and_commutes_with_alpha():
    assert_allclose(anticommutator(GAMMA5, BETA), np.zeros((4, 4)))
    for a in ALPHA:
        assert_allclose(GAMMA5 @ a, a @ GAMMA5)


def test_spin_matrices_commutator():
    assert_allclose(SPIN[0] @ SPIN[1] - SPIN[1] @ SPIN[0], -2j * SPIN[2], atol=1e-15)


def test_projectors_on_a_batch_of_normals(rng):
    n = rng.standard_normal((50, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    Pp, Pm = projector(n, "+"), projector(n, "-")
    assert Pp.shape == (50, 4, 4)
    assert_allclose(np.trace(Pp, axis1=1, axis2=2), 2.0, atol=1e-14)
    assert_allclose(Pp + Pm, np.broadcast_to(I4, Pp.shape), atol=1e-15)
    # beta P_- = P_+ beta
    assert_allclose(BETA @ Pm, Pp @ BETA, atol=1e-15)


def test_dot_products_are_linear():
    v = np.array([0.3, -1.2, 2.0])
    assert_allclose(alpha_dot(v), 0.3 * ALPHA[0] - 1.2 * ALPHA[1] + 2.0 * ALPHA[2])
    assert_allclose(spin_dot(2 * v), 2 * spin_dot(v))


def test_projector_rejects_non_unit_normal():
    with pytest.raises(ArgumentError):
        projector(np.array([0.0, 0.0, 2.0]), +1)


def test_bad_alpha_index_and_sign():
    with pytest.raises(ArgumentError):
        dirac_alpha(0)
    with pytest.raises(ArgumentError):
        projector(np.array([0.0, 0.0, 1.0]), 0)
    assert_allclose(dirac_alpha(3), ALPHA[2])
