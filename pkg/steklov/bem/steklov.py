"""Poincare-Steklov operators from Lambda, the Calderon projector, and discrete H^s weights.

Interior:  A_m = -P_+ beta Lambda^-1 P_-   (P_- data to the P_+ trace)
Exterior:  A^e = -P_- beta Lambda^-1 P_+   (from t^e Phi = Lambda - P_- beta)
"""
from typing import Optional

import numpy as np
import scipy.fft
from scipy.linalg import svdvals

from ..clifford import BETA, alpha_dot, projector
from ..geometry import SurfaceMesh, TraceField
from ..kernels import KernelParams
from ..shared.errors import CapabilityError
from ..shared.models import MeshKind, OperatorLabel
from .assembly import assemble_cauchy, assemble_lambda
from .operators import BoundaryOperator, invert_dense


def left_blocks(blocks: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """diag(blocks) @ matrix for node blocks of shape (N, 4, 4)."""
    n = blocks.shape[0]
    return np.einsum("nab,nbj->naj", blocks, matrix.reshape(n, 4, -1)).reshape(matrix.shape)


def right_blocks(matrix: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    """matrix @ diag(blocks)."""
    n = blocks.shape[0]
    return np.einsum("inb,nba->ina", matrix.reshape(-1, n, 4), blocks).reshape(matrix.shape)


def projector_blocks(mesh: SurfaceMesh, sign) -> np.ndarray:
    return projector(mesh.normals, sign)


def _ps_matrix(mesh: SurfaceMesh, lambda_inverse: np.ndarray, range_sign: int) -> np.ndarray:
    left = projector_blocks(mesh, range_sign) @ BETA
    right = projector_blocks(mesh, -range_sign)
    return -right_blocks(left_blocks(left, lambda_inverse), right)


def ps_interior(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None,
                lambda_inverse: Optional[BoundaryOperator] = None) -> BoundaryOperator:
    if lambda_inverse is None:
        lambda_inverse = invert_dense(assemble_lambda(mesh, p, threads))
    return BoundaryOperator(matrix=_ps_matrix(mesh, lambda_inverse.matrix, +1), mesh=mesh,
                            label=OperatorLabel.PS_INTERIOR, m=p.m, z=p.z)


def ps_exterior(mesh: SurfaceMesh, mass: float, z: complex, threads: Optional[int] = None,
                lambda_inverse: Optional[BoundaryOperator] = None) -> BoundaryOperator:
    p = KernelParams(m=mass, z=z)
    if lambda_inverse is None:
        lambda_inverse = invert_dense(assemble_lambda(mesh, p, threads))
    return BoundaryOperator(matrix=_ps_matrix(mesh, lambda_inverse.matrix, -1), mesh=mesh,
                            label=OperatorLabel.PS_EXTERIOR, m=mass, z=p.z)


def calderon_projector(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None,
                       cauchy: Optional[BoundaryOperator] = None) -> BoundaryOperator:
    """C = 1/2 + i C_z (alpha.n): identity on traces of interior solutions of (D_m - z)u = 0."""
    if cauchy is None:
        cauchy = assemble_cauchy(mesh, p, threads)
    matrix = 1j * right_blocks(cauchy.matrix, alpha_dot(mesh.normals))
    matrix[np.diag_indices_from(matrix)] += 0.5
    return BoundaryOperator(matrix=matrix, mesh=mesh, label=OperatorLabel.COMPOSITE, m=p.m, z=p.z)


def sobolev_weight(field: TraceField, s: float) -> TraceField:
    """(1 - Delta_Sigma)^{s/2}: spherical harmonics on spheres, Fourier on periodic chart grids."""
    mesh = field.mesh
    if s == 0:
        return mesh.field(field.values.copy())
    if mesh.is_sphere:
        return mesh.field(mesh.harmonics().sobolev(field.values, s))
    if mesh.kind == MeshKind.CHART:
        n, h = mesh.grid_size, mesh.length / mesh.grid_size
        grid = field.values.reshape(n, n, 4)
        xi = 2.0 * np.pi * scipy.fft.fftfreq(n, d=h)
        weight = (1.0 + xi[:, None] ** 2 + xi[None, :] ** 2) ** (s / 2.0)
        out = scipy.fft.ifft2(weight[:, :, None] * scipy.fft.fft2(grid, axes=(0, 1)), axes=(0, 1))
        return mesh.field(out.reshape(-1, 4))
    raise CapabilityError(f"H^s weighting is available on sphere and chart-graph meshes, not {mesh.kind.value}")


def sobolev_norm(field: TraceField, s: float) -> float:
    return sobolev_weight(field, s).norm()


def sobolev_operator_norm(op: BoundaryOperator, source_order: float, target_order: float = 0.0) -> float:
    """Norm of op from H^source_order to H^target_order on the resolved space of a sphere."""
    mesh = op.mesh
    if not mesh.is_sphere:
        raise CapabilityError("operator norms between Sobolev spaces need a sphere mesh")
    sh = mesh.harmonics()
    basis = mesh.resolved_columns()
    count = basis.shape[1]

    def weigh(columns: np.ndarray, s: float) -> np.ndarray:
        nodal = columns.reshape(mesh.size, 4 * count)
        return sh.sobolev(nodal, s).reshape(4 * mesh.size, count)

    image = weigh(op.matrix @ weigh(basis, -source_order), target_order)
    root = np.sqrt(mesh.spinor_weights)
    return float(svdvals(root[:, None] * image)[0])
