"""Dirac and Pauli matrices in the Dirac representation, projectors and spin identities.

All functions accept batched inputs: a vector argument of shape (..., 3) yields
matrices of shape (..., 4, 4).
"""
from typing import Dict, Union

import numpy as np

from .shared.errors import ArgumentError

# Configuration
UNIT_TOLERANCE = 1e-12

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
ZERO2 = np.zeros((2, 2), dtype=complex)

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

ALPHA = np.array([np.block([[ZERO2, s], [s, ZERO2]]) for s in SIGMA])
BETA = np.block([[I2, ZERO2], [ZERO2, -I2]])
GAMMA5 = np.block([[ZERO2, I2], [I2, ZERO2]])
# S_j = -gamma5 alpha_j = -diag(sigma_j, sigma_j)
SPIN = np.array([-GAMMA5 @ a for a in ALPHA])


def dirac_alpha(j: int) -> np.ndarray:
    if j not in (1, 2, 3):
        raise ArgumentError(f"alpha index must be 1, 2 or 3, got {j}")
    return ALPHA[j - 1].copy()


def dirac_beta() -> np.ndarray:
    return BETA.copy()


def gamma5() -> np.ndarray:
    return GAMMA5.copy()


def alpha_dot(v) -> np.ndarray:
    v = np.asarray(v)
    return np.einsum("...j,jab->...ab", v, ALPHA)


def spin_dot(v) -> np.ndarray:
    v = np.asarray(v)
    return np.einsum("...j,jab->...ab", v, SPIN)


def check_unit(n, tolerance: float = UNIT_TOLERANCE) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    norms = np.linalg.norm(n, axis=-1)
    if n.shape[-1] != 3 or np.any(np.abs(norms - 1.0) > tolerance):
        bad = float(np.max(np.abs(norms - 1.0))) if norms.size else float("nan")
        raise ArgumentError(f"projector needs unit normals (max | |n|-1 | = {bad:.3e})")
    return n


def _sign(sign: Union[int, str]) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ArgumentError(f"projector sign must be + or -, got {sign!r}")


def projector(n, sign: Union[int, str]) -> np.ndarray:
    """P+- = (I -+ i beta alpha.n)/2 for unit n (batched over leading axes)."""
    s = _sign(sign)
    n = check_unit(n)
    return 0.5 * (I4 - s * 1j * BETA @ alpha_dot(n))


def projector_field(normals, sign: Union[int, str]) -> np.ndarray:
    return projector(normals, sign)


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def _max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def algebra_residuals(rng: np.random.Generator, samples: int = 1000) -> Dict[str, float]:
    """Largest entrywise residual of each algebraic identity over random samples."""
    residuals = {}
    clifford = 0.0
    for j in range(3):
        clifford = max(clifford, _max_norm(anticommutator(ALPHA[j], BETA)))
        for k in range(3):
            target = 2.0 * I4 if j == k else 0.0 * I4
            clifford = max(clifford, _max_norm(anticommutator(ALPHA[j], ALPHA[k]) - target))
    residuals["clifford_anticommutation"] = clifford

    X = rng.standard_normal((samples, 3))
    Y = rng.standard_normal((samples, 3))
    aX, aY = alpha_dot(X), alpha_dot(Y)
    dots = np.einsum("ij,ij->i", X, Y)[:, None, None]
    residuals["alpha_product_identity"] = _max_norm(
        1j * aX @ aY - 1j * dots * I4 - spin_dot(np.cross(X, Y)))
    residuals["spin_alpha_anticommutator"] = _max_norm(
        anticommutator(spin_dot(X), aY) + dots * GAMMA5)
    residuals["spin_beta_commutator"] = _max_norm(spin_dot(X) @ BETA - BETA @ spin_dot(X))

    n = rng.standard_normal((samples, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    Pp, Pm = projector(n, +1), projector(n, -1)
    an = alpha_dot(n)
    projector_res = max(
        _max_norm(Pp @ Pp - Pp), _max_norm(Pm @ Pm - Pm),
        _max_norm(dagger(Pp) - Pp), _max_norm(dagger(Pm) - Pm),
        _max_norm(Pp @ Pm), _max_norm(Pp + Pm - I4),
        _max_norm(Pp @ an - an @ Pm), _max_norm(Pm @ an - an @ Pp),
        _max_norm(BETA @ Pm - Pp @ BETA), _max_norm(BETA @ Pp - Pm @ BETA),
    )
    residuals["projector_algebra"] = projector_res

    # tangential tau: (S.tau - i m beta alpha.n)^2 = (|tau|^2 + m^2) I and P+- S.tau = S.tau P-+
    tau = rng.standard_normal((samples, 3))
    tau -= np.einsum("ij,ij->i", tau, n)[:, None] * n
    mass = rng.uniform(0.1, 10.0, samples)[:, None, None]
    Stau = spin_dot(tau)
    block = Stau - 1j * mass * BETA @ an
    square = (np.einsum("ij,ij->i", tau, tau)[:, None, None] + mass ** 2) * I4
    residuals["tangential_square"] = _max_norm(block @ block - square) / float(np.max(square.real))
    residuals["tangential_intertwining"] = max(
        _max_norm(Pp @ Stau - Stau @ Pm), _max_norm(Pm @ Stau - Stau @ Pp))
    return residuals
