"""Resolvents of the free, MIT and large-mass Dirac operators applied to volume sources.

    free:          u0 = (D_mass - z)^-1 f = (D_mass + z)(-Delta + kappa^2)^-1 f
    mit:           R_MIT f = u0 - Phi Lambda^-1 t u0                    (interior)
    exterior_mit:  R~ f = u0 - Phi Lambda^-1 t u0                       (exterior, P_+ trace vanishes)
    full:          R_M f = R_MIT f + E^i P_- phi + E^e P_+ phi,  phi = Psi^-1 G_+ R_MIT f

with E^i = Phi_m Lambda_m^-1 on P_- data and E^e = Phi_{m+M} Lambda_{m+M}^-1 on P_+ data,
for sources supported inside the surface.
"""
import logging
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel

from ..bem import BoundaryOperator, assemble_lambda, boundary_limit, invert_dense, potential_eval
from ..bem.steklov import left_blocks
from ..clifford import BETA, I4, alpha_dot, projector
from ..geometry import SurfaceMesh, TraceField, VolumeGrid
from ..kernels import KernelParams, dirac_apply_fd, phi_z, yukawa_ball, yukawa_gaussian
from ..shared.errors import ArgumentError, CapabilityError
from ..shared.models import Complex, ResolventKind, Side
from .krein import KreinBlocks, krein_blocks

logger = logging.getLogger(__name__)

# Configuration
QUADRATURE_CHUNK = 32
COINCIDENCE_RADIUS = 1e-12


class GaussianSource(BaseModel):
    """f(x) = s exp(-|x - c|^2 / (2 width^2)); its free resolvent is closed-form."""

    center: np.ndarray
    width: float
    spinor: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    def __call__(self, points) -> np.ndarray:
        d = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        gauss = np.exp(-np.sum(d * d, axis=1) / (2.0 * self.width ** 2))
        return gauss[:, None] * self.spinor[None, :]

    def free_resolvent(self, points, mass: float, z: complex) -> np.ndarray:
        p = KernelParams(m=mass, z=z)
        d = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        r = np.linalg.norm(d, axis=1)
        w, dw = yukawa_gaussian(r, p.kappa, self.width)
        unit = d / np.where(r > 0, r, 1.0)[:, None]
        matrix = (-1j * dw)[:, None, None] * alpha_dot(unit) + w[:, None, None] * (mass * BETA + p.z * I4)
        return np.einsum("nab,b->na", matrix, self.spinor)


class VolumeSource(BaseModel):
    """Callable source on a ball or shell grid; free resolvent by singularity-subtracted quadrature."""

    values: Callable
    grid: VolumeGrid

    class Config:
        arbitrary_types_allowed = True

    def __call__(self, points) -> np.ndarray:
        return np.asarray(self.values(np.atleast_2d(np.asarray(points, dtype=float))), dtype=complex)

    def free_resolvent(self, points, mass: float, z: complex) -> np.ndarray:
        """sum_j w_j phi(x - y_j)(f(y_j) - f(x)) + (D + z) V(x) f(x), V the volume potential of the region."""
        if self.grid.radius is None:
            raise CapabilityError("singularity subtraction needs a ball or shell grid")
        p = KernelParams(m=mass, z=z)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        sources = self(self.grid.points)
        rho = np.linalg.norm(points, axis=1)
        V, dV = yukawa_ball(rho, p.kappa, self.grid.radius)
        inside = rho < self.grid.radius
        if self.grid.region == "exterior":
            V, dV = 1.0 / p.kappa ** 2 - V, -dV
            inside = ~inside
        local = np.where(inside[:, None], self(points), 0.0)
        out = np.empty((points.shape[0], 4), dtype=complex)
        for start in range(0, points.shape[0], QUADRATURE_CHUNK):
            block = slice(start, start + QUADRATURE_CHUNK)
            d = points[block, None, :] - self.grid.points[None, :, :]
            far = np.linalg.norm(d, axis=-1) > COINCIDENCE_RADIUS
            kernel = np.zeros(d.shape[:2] + (4, 4), dtype=complex)
            kernel[far] = phi_z(d[far], p)
            difference = sources[None, :, :] - local[block, None, :]
            out[block] = np.einsum("j,tjab,tjb->ta", self.grid.weights, kernel, difference)
        unit = points / np.where(rho > 0, rho, 1.0)[:, None]
        correction = (-1j * dV)[:, None, None] * alpha_dot(unit) + V[:, None, None] * (mass * BETA + p.z * I4)
        return out + np.einsum("nab,nb->na", correction, local)


Source = Union[GaussianSource, VolumeSource]


class LiftedField(BaseModel):
    """x -> u0(x) + scale * Phi_p[density](x): a free resolvent corrected by a boundary potential."""

    mesh: SurfaceMesh
    params: KernelParams
    density: np.ndarray
    source: Optional[Source] = None
    scale: Complex = -1.0
    threads: Optional[int] = None

    class Config:
        arbitrary_types_allowed = True

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = self.scale * potential_eval(self.mesh, self.params, self.density, points, self.threads)
        if self.source is not None:
            out = out + self.source.free_resolvent(points, self.params.m, self.params.z)
        return out


class ResolventResult(BaseModel):
    kind: ResolventKind
    volume: np.ndarray
    trace: TraceField
    field: LiftedField
    difference: Optional[np.ndarray] = None
    exterior: Optional[np.ndarray] = None

    class Config:
        arbitrary_types_allowed = True


def free_trace(mesh: SurfaceMesh, source: Source, mass: float, z: complex) -> np.ndarray:
    return source.free_resolvent(mesh.nodes, mass, z).reshape(-1)


def _lambda_inverse(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int]) -> BoundaryOperator:
    return invert_dense(assemble_lambda(mesh, p, threads))


def lifted_resolvent(mesh: SurfaceMesh, source: Source, mass: float, z: complex, side: Side,
                     threads: Optional[int] = None,
                     lambda_inverse: Optional[BoundaryOperator] = None) -> Tuple[LiftedField, TraceField]:
    """MIT-type resolvent on one side: the lifted field and its boundary trace by one-sided limits."""
    p = KernelParams(m=mass, z=z)
    if lambda_inverse is None:
        lambda_inverse = _lambda_inverse(mesh, p, threads)
    t0 = free_trace(mesh, source, mass, z)
    density = lambda_inverse.matrix @ t0
    field = LiftedField(mesh=mesh, params=p, density=density, source=source, threads=threads)
    trace = t0.reshape(-1, 4) - boundary_limit(mesh, p, density, side, threads=threads).values
    return field, mesh.field(trace)


def mit_boundary_data(mesh: SurfaceMesh, source: Source, m: float, z: complex,
                      lambda_inverse: BoundaryOperator) -> TraceField:
    """G_+ R_MIT f = P_+ beta Lambda^-1 t u0, the exact trace of the MIT resolvent."""
    density = lambda_inverse.matrix @ free_trace(mesh, source, m, z)
    return mesh.field(left_blocks(projector(mesh.normals, +1) @ BETA, density[:, None])[:, 0])


def resolvent_apply(kind: Union[ResolventKind, str], mesh: SurfaceMesh, grid: VolumeGrid, m: float, z: complex,
                    source: Source, M: Optional[float] = None, mass: Optional[float] = None,
                    exterior_grid: Optional[VolumeGrid] = None, threads: Optional[int] = None,
                    blocks: Optional[KreinBlocks] = None) -> ResolventResult:
    """Apply one of the resolvents to the source; values on the grid and the boundary trace."""
    kind = ResolventKind(kind)
    if mass is None:
        mass = m + M if (kind == ResolventKind.EXTERIOR_MIT and M is not None) else m
    if kind == ResolventKind.FREE:
        p = KernelParams(m=mass, z=z)
        field = LiftedField(mesh=mesh, params=p, density=np.zeros(4 * mesh.size, dtype=complex), source=source,
                            scale=0.0, threads=threads)
        return ResolventResult(kind=kind, volume=source.free_resolvent(grid.points, mass, z),
                               trace=mesh.field(free_trace(mesh, source, mass, z).reshape(-1, 4)), field=field)
    if kind in (ResolventKind.MIT, ResolventKind.EXTERIOR_MIT):
        side = Side.INTERIOR if kind == ResolventKind.MIT else Side.EXTERIOR
        field, trace = lifted_resolvent(mesh, source, mass, z, side, threads)
        return ResolventResult(kind=kind, volume=field(grid.points), trace=trace, field=field)
    if M is None:
        raise ArgumentError("the full resolvent needs the coupling M")
    if grid.region != "interior":
        raise ArgumentError("the full resolvent is evaluated for sources and grids inside the surface")
    if blocks is None:
        blocks = krein_blocks(mesh, m, M, z, threads)
    if blocks.interior_lambda_inverse is None:
        raise CapabilityError("the full resolvent needs Krein blocks built from Lambda inverses")
    p = KernelParams(m=m, z=z)
    mit, _ = lifted_resolvent(mesh, source, m, z, Side.INTERIOR, threads, blocks.interior_lambda_inverse)
    data = mit_boundary_data(mesh, source, m, z, blocks.interior_lambda_inverse)
    phi = blocks.psi_inverse.apply(data)
    minus, plus = phi.project(-1), phi.project(+1)
    interior_density = blocks.interior_lambda_inverse.matrix @ minus.flat
    correction = LiftedField(mesh=mesh, params=p, density=interior_density, scale=1.0, threads=threads)
    difference = correction(grid.points)
    exterior = None
    if exterior_grid is not None:
        exterior_density = blocks.exterior_lambda_inverse.matrix @ plus.flat
        extension = LiftedField(mesh=mesh, params=p.with_mass(m + M), density=exterior_density, scale=1.0,
                                threads=threads)
        exterior = extension(exterior_grid.points)
    logger.debug("full resolvent M=%g: |P_- phi| = %.3e, |P_+ phi| = %.3e", M, minus.norm(), plus.norm())
    return ResolventResult(kind=kind, volume=mit(grid.points) + difference, trace=phi, field=mit,
                           difference=difference, exterior=exterior)


def transmission_solve(blocks: KreinBlocks, data: TraceField) -> Tuple[TraceField, TraceField]:
    """(G_- v, G_+ v) from G_+ R_MIT f: G_- v = Xi_- A^e G_+ R_MIT f, G_+ v = G_+ R_MIT f + A^i G_- v."""
    minus = blocks.xi_minus.apply(blocks.exterior.apply(data))
    plus = data.values + blocks.interior.apply(minus).values
    return minus, blocks.mesh.field(plus)


def energy_identity(grid: VolumeGrid, field: Callable, trace: TraceField, mass: float) -> Dict[str, float]:
    """||D_mass u||^2 against ||alpha.grad u||^2 + mass^2 ||u||^2 + mass (||P_+ t u||^2 - ||P_- t u||^2).

    The boundary term changes sign on exterior grids, where the outward normal of the
    region points into the surface.
    """
    p = KernelParams(m=mass, z=0.0)
    applied, value = dirac_apply_fd(field, grid.points, p)
    gradient, _ = dirac_apply_fd(field, grid.points, p, mass=0.0)
    boundary = trace.project(+1).norm() ** 2 - trace.project(-1).norm() ** 2
    if grid.region == "exterior":
        boundary = -boundary
    lhs = grid.norm(applied) ** 2
    rhs = grid.norm(gradient) ** 2 + mass ** 2 * grid.norm(value) ** 2 + mass * boundary
    return {"lhs": float(lhs), "rhs": float(rhs), "relative": float(abs(lhs - rhs) / max(abs(lhs), 1e-300))}

