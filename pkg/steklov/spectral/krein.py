"""Krein blocks of the large-mass transmission problem.

    Psi = I - A^i_m - A^e_{m+M},   Xi = (I - A^i A^e - A^e A^i)^-1,
    Psi^-1 = Xi (I + A^i + A^e).

A^i maps P_- data to P_+ traces and A^e the reverse, so Xi is block diagonal:
Xi_+ = Xi P_+ = (I - A^i A^e)^-1 on the P_+ range and Xi_- = Xi P_- on the P_- range.
"""
import logging
import time
from typing import Dict, Optional

from pydantic import BaseModel
from scipy.linalg import svdvals

from ..bem import (BoundaryOperator, assemble_lambda, identity_operator, invert_dense, nodewise_operator,
                   ps_exterior, ps_interior, spectral_ps)
from ..clifford import projector
from ..geometry import SurfaceMesh
from ..kernels import KernelParams
from ..shared.errors import ArgumentError
from ..shared.models import Complex, Side

logger = logging.getLogger(__name__)


class KreinBlocks(BaseModel):
    interior: BoundaryOperator
    exterior: BoundaryOperator
    psi: BoundaryOperator
    psi_inverse: BoundaryOperator
    xi: BoundaryOperator
    xi_plus: BoundaryOperator
    xi_minus: BoundaryOperator
    m: float
    M: float
    z: Complex
    psi_sigma_min: float
    interior_lambda_inverse: Optional[BoundaryOperator] = None
    exterior_lambda_inverse: Optional[BoundaryOperator] = None

    class Config:
        arbitrary_types_allowed = True

    @property
    def mesh(self) -> SurfaceMesh:
        return self.psi.mesh


def range_projector(mesh: SurfaceMesh, sign) -> BoundaryOperator:
    return nodewise_operator(mesh, projector(mesh.normals, sign))


def ps_pair(mesh: SurfaceMesh, m: float, M: float, z: complex, threads: Optional[int] = None,
            exact: bool = False):
    """(A^i_m, A^e_{m+M}, Lambda_m^-1, Lambda_{m+M}^-1); exact operators carry no Lambda inverses."""
    if M <= 0:
        raise ArgumentError(f"coupling M must be positive, got {M}")
    if exact:
        return (spectral_ps(mesh, m, z, Side.INTERIOR), spectral_ps(mesh, m + M, z, Side.EXTERIOR), None, None)
    p = KernelParams(m=m, z=z)
    interior_inverse = invert_dense(assemble_lambda(mesh, p, threads))
    exterior_inverse = invert_dense(assemble_lambda(mesh, p.with_mass(m + M), threads))
    interior = ps_interior(mesh, p, lambda_inverse=interior_inverse)
    exterior = ps_exterior(mesh, m + M, z, lambda_inverse=exterior_inverse)
    return interior, exterior, interior_inverse, exterior_inverse


def psi_operator(interior: BoundaryOperator, exterior: BoundaryOperator) -> BoundaryOperator:
    return identity_operator(interior.mesh).plus(interior, -1.0).plus(exterior, -1.0)


def krein_blocks(mesh: SurfaceMesh, m: float, M: float, z: complex, threads: Optional[int] = None,
                 exact: bool = False) -> KreinBlocks:
    """Psi, its inverse, Xi and the blocks Xi_+-; exact=True uses the channel operators of a sphere."""
    start = time.perf_counter()
    interior, exterior, interior_inverse, exterior_inverse = ps_pair(mesh, m, M, z, threads, exact)
    identity = identity_operator(mesh)
    psi = psi_operator(interior, exterior)
    sigma = float(svdvals(psi.weighted())[-1])
    logger.debug("Psi(m=%g, M=%g, z=%s): sigma_min=%.3e", m, M, complex(z), sigma)
    psi_inverse = invert_dense(psi)
    mixed = interior.compose(exterior).plus(exterior.compose(interior))
    xi = invert_dense(identity.plus(mixed, -1.0))
    xi_plus = xi.compose(range_projector(mesh, +1))
    xi_minus = xi.compose(range_projector(mesh, -1))
    logger.debug("Krein blocks assembled in %.2fs", time.perf_counter() - start)
    return KreinBlocks(interior=interior, exterior=exterior, psi=psi, psi_inverse=psi_inverse, xi=xi,
                       xi_plus=xi_plus, xi_minus=xi_minus, m=m, M=M, z=complex(z), psi_sigma_min=sigma,
                       interior_lambda_inverse=interior_inverse, exterior_lambda_inverse=exterior_inverse)


def inverse_identity_residual(blocks: KreinBlocks) -> float:
    """||Psi^-1 - Xi (I + A^i + A^e)|| / ||Psi^-1|| in the L^2(Sigma) norm."""
    identity = identity_operator(blocks.mesh)
    formula = blocks.xi.compose(identity.plus(blocks.interior).plus(blocks.exterior))
    return blocks.psi_inverse.plus(formula, -1.0).norm() / blocks.psi_inverse.norm()


def block_structure_residual(blocks: KreinBlocks) -> Dict[str, float]:
    """Norms of the blocks that must vanish: P_+-(Psi - I)P_+- and P_-+ Xi P_+-."""
    mesh = blocks.mesh
    plus, minus = range_projector(mesh, +1), range_projector(mesh, -1)
    shifted = blocks.psi.plus(identity_operator(mesh), -1.0)
    return {
        "psi_diagonal": max(plus.compose(shifted).compose(plus).norm(),
                            minus.compose(shifted).compose(minus).norm()),
        "xi_plus_off_range": minus.compose(blocks.xi_plus).norm(),
        "xi_minus_off_range": plus.compose(blocks.xi_minus).norm(),
    }
