"""Operator identities used to validate an assembly.

    ((alpha.n) C)^2 = -1/4 I
    Lambda^2 = 1/4 + C^2 + (m I + z beta) S
    t^{i,e} Phi = -+ i/2 (alpha.n) + C
"""
import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import svdvals

from ..clifford import BETA, I4, alpha_dot
from ..geometry import SurfaceMesh
from ..kernels import KernelParams
from ..shared.models import Side
from .assembly import assemble_cauchy, assemble_lambda, assemble_single_layer
from .operators import BoundaryOperator, identity_operator, nodewise_operator, resolved_norm
from .potentials import boundary_limit
from .steklov import left_blocks

logger = logging.getLogger(__name__)

# Configuration
SMOOTH_J2 = 7


def smooth_densities(mesh: SurfaceMesh, rng: np.random.Generator, count: int) -> np.ndarray:
    """Random densities of low angular momentum on spheres, random nodal data elsewhere; shape (4N, count)."""
    if mesh.is_sphere:
        basis = mesh.resolved_columns(SMOOTH_J2)
        coefficients = rng.standard_normal((basis.shape[1], count)) + 1j * rng.standard_normal((basis.shape[1], count))
        return basis @ coefficients
    return rng.standard_normal((4 * mesh.size, count)) + 1j * rng.standard_normal((4 * mesh.size, count))


def _relative(mesh: SurfaceMesh, residual: np.ndarray, reference: np.ndarray) -> float:
    w = mesh.spinor_weights[:, None]
    return float(np.max(np.sqrt(np.sum(w * np.abs(residual) ** 2, axis=0) / np.sum(w * np.abs(reference) ** 2, axis=0))))


def cauchy_square_residual(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None,
                           cauchy: Optional[BoundaryOperator] = None) -> Tuple[float, float]:
    """(||((alpha.n) C)^2 + I/4||, measured constant c with ((alpha.n) C)^2 ~ c I) on the resolved space."""
    if cauchy is None:
        cauchy = assemble_cauchy(mesh, p, threads)
    an_cauchy = nodewise_operator(mesh, alpha_dot(mesh.normals)).compose(cauchy)
    square = an_cauchy.compose(an_cauchy)
    residual = resolved_norm(square.plus(identity_operator(mesh), 0.25))
    if mesh.is_sphere:
        basis = mesh.resolved_columns()
    else:
        basis = np.eye(4 * mesh.size) / np.sqrt(mesh.spinor_weights)[None, :]
    gram = np.conj(basis).T @ (mesh.spinor_weights[:, None] * (square.matrix @ basis))
    constant = float(np.real(np.trace(gram)) / basis.shape[1])
    logger.info("((alpha.n) C)^2 = %.6f I (residual to -1/4: %.3e)", constant, residual)
    return residual, constant


def cauchy_adjoint_residual(mesh: SurfaceMesh, m: float, z: complex, threads: Optional[int] = None) -> float:
    """||C_z^* - C_conj(z)|| / ||C_z||."""
    forward = assemble_cauchy(mesh, KernelParams(m=m, z=z), threads)
    conjugate = assemble_cauchy(mesh, KernelParams(m=m, z=np.conj(z)), threads)
    return resolved_norm(forward.adjoint().plus(conjugate, -1.0)) / resolved_norm(forward)


def lambda_square_residual(mesh: SurfaceMesh, p: KernelParams, rng: np.random.Generator, samples: int = 20,
                           threads: Optional[int] = None) -> float:
    """max over random smooth f of ||Lambda^2 f - (1/4 + C^2 + (m + z beta) S) f|| / ||f||."""
    cauchy = assemble_cauchy(mesh, p, threads)
    lam = assemble_lambda(mesh, p, threads)
    single = assemble_single_layer(mesh, p, threads)
    f = smooth_densities(mesh, rng, samples)
    mass_term = left_blocks(np.broadcast_to(p.m * I4 + p.z * BETA, (mesh.size, 4, 4)), single.matrix @ f)
    residual = lam.matrix @ (lam.matrix @ f) - 0.25 * f - cauchy.matrix @ (cauchy.matrix @ f) - mass_term
    return _relative(mesh, residual, f)


def jump_residuals(mesh: SurfaceMesh, p: KernelParams, rng: np.random.Generator, delta: float = 1e-2,
                   threads: Optional[int] = None) -> Dict[str, float]:
    """Relative error of the one-sided limits of Phi[g] against (-+ i/2 (alpha.n) + C) g."""
    cauchy = assemble_cauchy(mesh, p, threads)
    g = smooth_densities(mesh, rng, 1)[:, 0]
    principal = cauchy.matrix @ g
    jump = left_blocks(0.5j * alpha_dot(mesh.normals), g[:, None])[:, 0]
    out = {}
    for side, sign in ((Side.INTERIOR, -1.0), (Side.EXTERIOR, 1.0)):
        expected = principal + sign * jump
        limit = boundary_limit(mesh, p, g, side, delta, threads).flat
        out[side.value] = _relative(mesh, (limit - expected)[:, None], expected[:, None])
    return out


def single_layer_min_eigenvalue(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None) -> float:
    """Smallest eigenvalue of the symmetrized S_z on the resolved space (positive for real z in (-m, m))."""
    single = assemble_single_layer(mesh, p, threads)
    root = np.sqrt(mesh.spinor_weights)
    basis = mesh.resolved_columns() if mesh.is_sphere else np.diag(1.0 / root)
    form = np.conj(basis).T @ (mesh.spinor_weights[:, None] * (single.matrix @ basis))
    return float(np.min(np.linalg.eigvalsh(0.5 * (form + np.conj(form).T))))


def lambda_sigma_min(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None) -> float:
    return float(svdvals(assemble_lambda(mesh, p, threads).weighted())[-1])
