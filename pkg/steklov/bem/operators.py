import logging
import time
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel
from scipy.linalg import lu_factor, lu_solve, svdvals

from ..geometry import SurfaceMesh, TraceField
from ..shared.errors import InversionError
from ..shared.models import Complex, OperatorLabel

logger = logging.getLogger(__name__)

# Configuration
INVERTIBILITY_THRESHOLD = 1e-12


class BoundaryOperator(BaseModel):
    """Dense (4N)x(4N) matrix acting on nodal spinor samples, weights folded in."""

    matrix: np.ndarray
    mesh: SurfaceMesh
    label: OperatorLabel
    m: float = 0.0
    z: Complex = 0j
    lu_residual: Optional[float] = None

    class Config:
        arbitrary_types_allowed = True

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def _like(self, matrix: np.ndarray, label: OperatorLabel = OperatorLabel.COMPOSITE) -> "BoundaryOperator":
        return BoundaryOperator(matrix=matrix, mesh=self.mesh, label=label, m=self.m, z=self.z)

    def apply(self, field: Union[TraceField, np.ndarray]) -> TraceField:
        values = field.flat if isinstance(field, TraceField) else np.asarray(field).reshape(-1)
        return self.mesh.field(self.matrix @ values)

    def compose(self, other: "BoundaryOperator") -> "BoundaryOperator":
        return self._like(self.matrix @ other.matrix)

    def plus(self, other: "BoundaryOperator", scale: complex = 1.0) -> "BoundaryOperator":
        return self._like(self.matrix + scale * other.matrix)

    def adjoint(self) -> "BoundaryOperator":
        """L^2(Sigma) adjoint W^-1 A^H W."""
        w = self.mesh.spinor_weights
        return self._like(np.conj(self.matrix).T * w[None, :] / w[:, None], self.label)

    def weighted(self) -> np.ndarray:
        """W^1/2 A W^-1/2, whose spectral norm is the L^2(Sigma) operator norm."""
        root = np.sqrt(self.mesh.spinor_weights)
        return self.matrix * root[:, None] / root[None, :]

    def norm(self) -> float:
        return float(svdvals(self.weighted())[0])


def identity_operator(mesh: SurfaceMesh) -> BoundaryOperator:
    return BoundaryOperator(matrix=np.eye(4 * mesh.size, dtype=complex), mesh=mesh,
                            label=OperatorLabel.COMPOSITE)


def nodewise_operator(mesh: SurfaceMesh, blocks: np.ndarray) -> BoundaryOperator:
    """Block-diagonal operator from (N, 4, 4) node matrices (projectors, alpha.n, beta)."""
    blocks = np.broadcast_to(blocks, (mesh.size, 4, 4))
    matrix = np.zeros((mesh.size, 4, mesh.size, 4), dtype=complex)
    index = np.arange(mesh.size)
    matrix[index, :, index, :] = blocks
    return BoundaryOperator(matrix=matrix.reshape(4 * mesh.size, 4 * mesh.size), mesh=mesh,
                            label=OperatorLabel.COMPOSITE)


def invert_dense(op: BoundaryOperator) -> BoundaryOperator:
    """Dense LU inverse; raises InversionError when sigma_min/sigma_max <= 1e-12."""
    start = time.perf_counter()
    s = svdvals(op.matrix)
    sigma_min, sigma_max = float(s[-1]), float(s[0])
    logger.debug("%s: sigma_min=%.3e sigma_max=%.3e", op.label.value, sigma_min, sigma_max)
    if sigma_max == 0.0 or sigma_min / sigma_max <= INVERTIBILITY_THRESHOLD:
        raise InversionError("operator is singular to working tolerance", sigma_min=sigma_min,
                             label=op.label.value)
    lu = lu_factor(op.matrix)
    identity = np.eye(op.size, dtype=complex)
    inverse = lu_solve(lu, identity)
    residual = float(np.linalg.norm(op.matrix @ inverse - identity, 2))
    logger.debug("%s inverted in %.2fs, residual %.2e", op.label.value, time.perf_counter() - start, residual)
    return BoundaryOperator(matrix=inverse, mesh=op.mesh, label=OperatorLabel.COMPOSITE, m=op.m, z=op.z,
                            lu_residual=residual)


def sigma_min(op: BoundaryOperator) -> float:
    return float(svdvals(op.matrix)[-1])


def resolved_norm(op: BoundaryOperator, max_j2: Optional[int] = None) -> float:
    """L^2 operator norm restricted to the resolved spinor space (channels with 2j <= max_j2).

    Falls back to the full L^2 norm on meshes without spherical harmonics.
    """
    if not op.mesh.is_sphere:
        return op.norm()
    basis = op.mesh.resolved_columns(max_j2)
    root = np.sqrt(op.mesh.spinor_weights)
    return float(svdvals(root[:, None] * (op.matrix @ basis))[0])
