import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, PrivateAttr
from scipy.special import roots_laguerre, roots_legendre

from ..clifford import projector
from ..shared.errors import ArgumentError, CapabilityError, MeshLoadError
from ..shared.models import MeshKind
from .charts import Chart, normal_from_gradient
from .harmonics import SphereHarmonics, cartesian_angles, harmonic_matrix, resolved_basis

logger = logging.getLogger(__name__)

# Configuration
NORMAL_TOLERANCE = 1e-10


class SurfaceMesh(BaseModel):
    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    kind: MeshKind
    R: Optional[float] = None
    order: Optional[int] = None
    chart: Optional[Chart] = None
    length: Optional[float] = None
    grid_size: Optional[int] = None

    _cache: Dict[str, Any] = PrivateAttr(default_factory=dict)

    class Config:
        arbitrary_types_allowed = True

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def is_sphere(self) -> bool:
        return self.kind == MeshKind.SPHERE

    @property
    def area(self) -> float:
        return float(np.sum(self.weights))

    @property
    def spinor_weights(self) -> np.ndarray:
        return np.repeat(self.weights, 4)

    def cached(self, key: str, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def harmonics(self) -> SphereHarmonics:
        if not self.is_sphere:
            raise CapabilityError(f"spherical harmonics need a sphere mesh, got {self.kind.value}")

        def build():
            x, w = roots_legendre(self.order)
            return SphereHarmonics(self.R, x[::-1].copy(), w[::-1].copy(), 2 * self.order, self.order)

        return self.cached("harmonics", build)

    @property
    def resolved_j2(self) -> int:
        """Largest 2j of the resolved spinor space (orbital degrees stay below order)."""
        return 2 * self.order - 3

    def resolved_space(self):
        """Weighted-orthonormal basis of the resolved spinor space V and its channel metadata."""
        def build():
            sh = self.harmonics()
            unit = self.nodes / self.R
            basis, meta = resolved_basis(unit, sh.grid_matrix, sh.L, self.R, self.resolved_j2)
            return basis, meta
        return self.cached("resolved_space", build)

    def resolved_projector(self) -> np.ndarray:
        def build():
            basis, _ = self.resolved_space()
            return basis @ (np.conj(basis).T * self.spinor_weights[None, :])
        return self.cached("resolved_projector", build)

    def resolved_columns(self, max_j2: Optional[int] = None) -> np.ndarray:
        basis, meta = self.resolved_space()
        if max_j2 is None:
            return basis
        keep = [i for i, entry in enumerate(meta) if entry[0] <= max_j2]
        return basis[:, keep]

    def field(self, values) -> "TraceField":
        return TraceField(values=np.asarray(values, dtype=complex).reshape(self.size, 4), mesh=self)


class TraceField(BaseModel):
    values: np.ndarray
    mesh: SurfaceMesh

    class Config:
        arbitrary_types_allowed = True

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.mesh.weights[:, None] * np.abs(self.values) ** 2)))

    def inner(self, other: "TraceField") -> complex:
        return complex(np.sum(self.mesh.weights[:, None] * np.conj(other.values) * self.values))

    def project(self, sign) -> "TraceField":
        P = projector(self.mesh.normals, sign)
        return TraceField(values=np.einsum("nab,nb->na", P, self.values), mesh=self.mesh)


def sphere_mesh(R: float, order: int) -> SurfaceMesh:
    """Gauss-Legendre in cos(theta) times 2*order uniform azimuths; 2*order^2 nodes."""
    if R <= 0:
        raise ArgumentError(f"sphere radius must be positive, got {R}")
    if order < 4 or order % 2:
        raise ArgumentError(f"sphere order must be even and >= 4, got {order}")
    x, w = roots_legendre(order)
    x, w = x[::-1], w[::-1]
    n_phi = 2 * order
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    sin_t = np.sqrt(1.0 - x ** 2)
    unit = np.stack([
        np.outer(sin_t, np.cos(phi)).ravel(),
        np.outer(sin_t, np.sin(phi)).ravel(),
        np.repeat(x, n_phi),
    ], axis=1)
    weights = np.repeat(w, n_phi) * (2.0 * np.pi / n_phi) * R ** 2
    return SurfaceMesh(nodes=R * unit, normals=unit, weights=weights, kind=MeshKind.SPHERE,
                       R=float(R), order=int(order))


def chart_graph_mesh(chart: Chart, length: float, n: int) -> SurfaceMesh:
    """Periodic graph patch over [0, length)^2 with n x n nodes."""
    if n < 4 or n & (n - 1):
        raise ArgumentError(f"chart grid size must be a power of two >= 4, got {n}")
    h = length / n
    y1, y2 = np.meshgrid(np.arange(n) * h, np.arange(n) * h, indexing="ij")
    y = np.stack([y1.ravel(), y2.ravel()], axis=1)
    grad = chart.gradient(y)
    nodes = np.column_stack([y, chart.value(y)])
    normals = normal_from_gradient(grad)
    weights = np.sqrt(1.0 + np.sum(grad ** 2, axis=1)) * h * h
    return SurfaceMesh(nodes=nodes, normals=normals, weights=weights, kind=MeshKind.CHART,
                       chart=chart, length=float(length), grid_size=int(n))


def mesh_from_file(path: Union[str, Path]) -> SurfaceMesh:
    """Text format: `x y z nx ny nz w` per line, `#` comments."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise MeshLoadError(f"cannot read mesh file {path}: {str(e)}")
    rows = []
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 7:
            raise MeshLoadError(f"expected 7 fields, found {len(fields)}", line=number)
        try:
            values = [float(v) for v in fields]
        except ValueError:
            raise MeshLoadError(f"non-numeric field in {line!r}", line=number)
        normal = np.array(values[3:6])
        if abs(np.linalg.norm(normal) - 1.0) > NORMAL_TOLERANCE:
            raise MeshLoadError(f"non-unit normal {tuple(normal)}", line=number)
        if values[6] <= 0:
            raise MeshLoadError(f"non-positive weight {values[6]}", line=number)
        rows.append(values)
    if not rows:
        raise MeshLoadError(f"mesh file {path} has no nodes")
    data = np.array(rows)
    logger.debug("loaded %d nodes from %s", len(rows), path)
    return SurfaceMesh(nodes=data[:, :3], normals=data[:, 3:6], weights=data[:, 6], kind=MeshKind.FILE)


def write_mesh(mesh: SurfaceMesh, path: Union[str, Path]):
    data = np.column_stack([mesh.nodes, mesh.normals, mesh.weights])
    np.savetxt(path, data, fmt="%.17g", header="x y z nx ny nz w")


def sphere_quadrature_error(mesh: SurfaceMesh, max_degree: int) -> float:
    """max |int Y_lm dsigma - R^2 sqrt(4 pi) delta_l0| over l <= max_degree."""
    theta, phi = cartesian_angles(mesh.nodes)
    Y = harmonic_matrix(max_degree + 1, theta, phi)
    integrals = mesh.weights @ Y / mesh.R ** 2
    integrals[0] -= np.sqrt(4.0 * np.pi)
    return float(np.max(np.abs(integrals)))


class VolumeGrid(BaseModel):
    points: np.ndarray
    weights: np.ndarray
    region: str
    radius: Optional[float] = None

    class Config:
        arbitrary_types_allowed = True

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def norm(self, values) -> float:
        values = np.asarray(values)
        return float(np.sqrt(np.sum(self.weights[:, None] * np.abs(values.reshape(self.size, -1)) ** 2)))


def _sphere_directions(order: int) -> Tuple[np.ndarray, np.ndarray]:
    unit = sphere_mesh(1.0, order)
    return unit.nodes, unit.weights


def ball_grid(R: float, n_radial: int, order: int) -> VolumeGrid:
    x, w = roots_legendre(n_radial)
    r = 0.5 * R * (x + 1.0)
    wr = 0.5 * R * w * r ** 2
    directions, dw = _sphere_directions(order)
    points = (r[:, None, None] * directions[None, :, :]).reshape(-1, 3)
    weights = (wr[:, None] * dw[None, :]).ravel()
    return VolumeGrid(points=points, weights=weights, region="interior", radius=float(R))


def shell_grid(R: float, thickness: float, n_radial: int, order: int) -> VolumeGrid:
    """Exterior of the ball: r = R + thickness * t with Gauss-Laguerre t."""
    t, w = roots_laguerre(n_radial)
    r = R + thickness * t
    wr = thickness * w * np.exp(t) * r ** 2
    directions, dw = _sphere_directions(order)
    points = (r[:, None, None] * directions[None, :, :]).reshape(-1, 3)
    weights = (wr[:, None] * dw[None, :]).ravel()
    return VolumeGrid(points=points, weights=weights, region="exterior", radius=float(R))


def surface_gradient(mesh: SurfaceMesh, values) -> np.ndarray:
    """Tangential gradient of nodal scalars by spectral differentiation; shape (..., 3)."""
    return mesh.harmonics().gradient(np.asarray(values))
