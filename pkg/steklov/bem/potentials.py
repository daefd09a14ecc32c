import logging
from typing import Optional, Union

import numpy as np

from ..geometry import SurfaceMesh, TraceField
from ..kernels import KernelParams
from ..shared.errors import ArgumentError
from ..shared.models import Side
from .assembly import DIRAC_MATRICES, dirac_coefficients, polar_coefficients, sphere_layer_matrix

logger = logging.getLogger(__name__)

# Configuration
NEAR_FRACTION = 0.5
LIMIT_DISTANCE = 1e-2


def _nodal_rows(mesh: SurfaceMesh, p: KernelParams, points: np.ndarray) -> np.ndarray:
    d = points[:, None, :] - mesh.nodes[None, :, :]
    values = dirac_coefficients(d, p) * mesh.weights[None, :, None]
    return np.einsum("ijc,cab->iajb", values, DIRAC_MATRICES)


def potential_matrix(mesh: SurfaceMesh, p: KernelParams, points, threads: Optional[int] = None) -> np.ndarray:
    """Matrix of Phi from nodal densities to spinor values at the points; shape (4 n, 4 N).

    On spheres, points closer than half a radius use the polar rule around their radial
    projection and densities are taken in the resolved space.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    rows = np.zeros((n, 4, mesh.size, 4), dtype=complex)
    if mesh.is_sphere:
        distance = np.abs(np.linalg.norm(points, axis=1) - mesh.R)
        near = distance < NEAR_FRACTION * mesh.R
        if np.any(near):
            coefficients = polar_coefficients(mesh, p, points[near], "dirac", threads)
            sources = coefficients @ mesh.harmonics().analysis_matrix
            rows[near] = np.einsum("tcj,cab->tajb", sources, DIRAC_MATRICES)
        if np.any(~near):
            rows[~near] = _nodal_rows(mesh, p, points[~near])
        return rows.reshape(4 * n, 4 * mesh.size) @ mesh.resolved_projector()
    spacing = np.sqrt(np.mean(mesh.weights))
    closest = np.min(np.linalg.norm(points[:, None, :] - mesh.nodes[None, :, :], axis=-1), axis=1)
    if np.any(closest < spacing):
        logger.warning("%d evaluation points lie within one node spacing of the surface; "
                       "node-to-point quadrature degrades there", int(np.sum(closest < spacing)))
    return _nodal_rows(mesh, p, points).reshape(4 * n, 4 * mesh.size)


def potential_eval(mesh: SurfaceMesh, p: KernelParams, density: Union[TraceField, np.ndarray], x,
                   threads: Optional[int] = None) -> np.ndarray:
    """Phi[g](x) for one point (returns shape (4,)) or many points (returns (n, 4))."""
    values = density.flat if isinstance(density, TraceField) else np.asarray(density).reshape(-1)
    x = np.asarray(x, dtype=float)
    out = (potential_matrix(mesh, p, x, threads) @ values).reshape(-1, 4)
    return out[0] if x.ndim == 1 else out


def _offset_values(mesh: SurfaceMesh, p: KernelParams, values: np.ndarray, offset: float,
                   threads: Optional[int]) -> np.ndarray:
    if mesh.is_sphere:
        matrix = sphere_layer_matrix(mesh, p, offset, "dirac", threads)
        return matrix @ (mesh.resolved_projector() @ values)
    points = mesh.nodes + offset * mesh.normals
    return potential_matrix(mesh, p, points, threads) @ values


def boundary_limit(mesh: SurfaceMesh, p: KernelParams, density: Union[TraceField, np.ndarray],
                   side: Union[Side, str] = Side.INTERIOR, delta: float = LIMIT_DISTANCE,
                   threads: Optional[int] = None) -> TraceField:
    """Limit of Phi[g] at every node from one side, by extrapolating values at delta and 2 delta."""
    side = Side(side)
    if delta <= 0:
        raise ArgumentError(f"limit distance must be positive, got {delta}")
    values = density.flat if isinstance(density, TraceField) else np.asarray(density).reshape(-1)
    sign = -1.0 if side == Side.INTERIOR else 1.0
    near = _offset_values(mesh, p, values, sign * delta, threads)
    far = _offset_values(mesh, p, values, 2.0 * sign * delta, threads)
    return mesh.field(2.0 * near - far)
