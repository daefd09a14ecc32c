"""Nystrom assembly of the Cauchy operator, Lambda and the single layer operator.

Sphere meshes use band-limited densities: nodal samples are interpolated by scalar
spherical harmonics of degree < order, and each target row is integrated with a polar
rule centered at the target, where the odd principal-value part cancels ring by ring.
Only one target per latitude ring is integrated; the other rows follow from the
rotation covariance phi(Rx) = S phi(x) S^-1 with S = exp(-i angle Sigma_3 / 2), since
the azimuthal grid is invariant under the rotations by multiples of 2 pi / n_phi.
Operators are then compressed to the resolved spinor space V: P_V K P_V.

Other meshes use plain node-to-node Nystrom sums with a disk self-term correction. The
punctured sum is a principal-value rule for the odd part only when the stencil around each
node is symmetric, so the Dirac kernel is assembled there on planar meshes only.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from ..clifford import ALPHA, BETA, I4
from ..geometry import SurfaceMesh
from ..geometry.harmonics import cartesian_angles, harmonic_matrix
from ..kernels import KernelParams, phi_coefficients, single_layer_kernel
from ..shared.errors import AssemblyError, CapabilityError
from ..shared.models import OperatorLabel
from ..shared.settings import get_thread_count
from .operators import BoundaryOperator
from .quadrature import SURFACE_TOLERANCE, pole_rotations, polar_rule, singular_scale

logger = logging.getLogger(__name__)

# Configuration
BLOCK_ENTRIES = 2_000_000
DUPLICATE_TOLERANCE = 1e-12
PLANAR_TOLERANCE = 1e-12

DIRAC_MATRICES = np.stack([I4, BETA, ALPHA[0], ALPHA[1], ALPHA[2]])
SCALAR_MATRICES = I4[None]


def dirac_coefficients(d: np.ndarray, p: KernelParams) -> np.ndarray:
    """phi(d) as coefficients on (I, beta, alpha_1, alpha_2, alpha_3); shape (..., 5)."""
    scalar, beta, alpha = phi_coefficients(d, p)
    return np.concatenate([scalar[..., None], beta[..., None], alpha], axis=-1)


def scalar_coefficients(d: np.ndarray, p: KernelParams) -> np.ndarray:
    return np.asarray(single_layer_kernel(d, p))[..., None]


KERNELS = {
    "dirac": (dirac_coefficients, DIRAC_MATRICES),
    "scalar": (scalar_coefficients, SCALAR_MATRICES),
}


def polar_coefficients(mesh: SurfaceMesh, p: KernelParams, targets: np.ndarray, kernel: str = "dirac",
                       threads: Optional[int] = None, offsets: Optional[np.ndarray] = None) -> np.ndarray:
    """Integrals of kernel(x - y) Y_lm(y) over the sphere for each target x; shape (n, c, L^2).

    Targets may lie on the sphere (principal value) or off it. offsets, the signed
    distances |x| - R, are taken from the caller when known; targets within
    SURFACE_TOLERANCE of the sphere are snapped onto it.
    """
    evaluate, matrices = KERNELS[kernel]
    sh = mesh.harmonics()
    R, L = mesh.R, sh.L
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    radii = np.linalg.norm(targets, axis=1)
    unit = np.where(radii[:, None] > 0, targets / np.where(radii > 0, radii, 1.0)[:, None], [0.0, 0.0, 1.0])
    if offsets is None:
        offsets = radii - R
    offsets = np.broadcast_to(np.asarray(offsets, dtype=float), radii.shape).copy()
    offsets[np.abs(offsets) <= SURFACE_TOLERANCE * R] = 0.0
    targets = unit * (R + offsets)[:, None]
    scales = np.array([singular_scale(R, p.k, offset) for offset in offsets])
    # group targets sharing a rule; scales are rounded down to powers of two
    levels = np.floor(np.log2(scales)).astype(int)
    out = np.zeros((targets.shape[0], matrices.shape[0], L * L), dtype=complex)

    jobs = []
    for level in np.unique(levels):
        rule = polar_rule(L, min(np.pi, 2.0 ** level))
        local = rule.local_directions()
        weights = rule.weights(R)
        index = np.flatnonzero(levels == level)
        block = max(1, BLOCK_ENTRIES // (rule.size * L * L))
        for start in range(0, index.size, block):
            jobs.append((index[start:start + block], local, weights))

    def run(job):
        index, local, weights = job
        rot = pole_rotations(unit[index])
        y = R * np.einsum("nij,qj->nqi", rot, local)
        values = evaluate(targets[index][:, None, :] - y, p)
        theta, phi = cartesian_angles(y.reshape(-1, 3))
        Y = harmonic_matrix(L, theta, phi).reshape(index.size, local.shape[0], L * L)
        out[index] = np.einsum("nqc,q,nql->ncl", values, weights, Y)

    with ThreadPoolExecutor(max_workers=get_thread_count(threads)) as pool:
        list(pool.map(run, jobs))
    return out


def ring_expand(rows: np.ndarray, mesh: SurfaceMesh) -> np.ndarray:
    """Full (4N)x(4N) matrix from the rows of the phi = 0 target of every latitude ring.

    rows has shape (n_theta, 4, N, 4).
    """
    n_theta, n_phi = mesh.order, 2 * mesh.order
    rows = rows.reshape(n_theta, 4, n_theta, n_phi, 4)
    full = np.empty((n_theta, n_phi, 4, n_theta, n_phi, 4), dtype=complex)
    half_spin = 0.5 * np.array([1.0, -1.0, 1.0, -1.0])
    for s in range(n_phi):
        d = np.exp(-1j * (2.0 * np.pi * s / n_phi) * half_spin)
        full[:, s] = d[None, :, None, None, None] * np.roll(rows, s, axis=3) * np.conj(d)[None, None, None, None, :]
    size = 4 * mesh.size
    return full.reshape(size, size)


def sphere_layer_matrix(mesh: SurfaceMesh, p: KernelParams, offset: float = 0.0, kernel: str = "dirac",
                        threads: Optional[int] = None) -> np.ndarray:
    """Layer operator from band-limited densities to the nodes moved by offset along the normal.

    offset = 0 gives the principal-value boundary operator; offset < 0 evaluates inside.
    """
    _, matrices = KERNELS[kernel]
    n_phi = 2 * mesh.order
    representatives = mesh.normals[::n_phi] * (mesh.R + offset)
    coefficients = polar_coefficients(mesh, p, representatives, kernel, threads, offsets=offset)
    sources = coefficients @ mesh.harmonics().analysis_matrix
    rows = np.einsum("tcj,cab->tajb", sources, matrices)
    return ring_expand(rows, mesh)


def compress(mesh: SurfaceMesh, matrix: np.ndarray) -> np.ndarray:
    P = mesh.resolved_projector()
    return P @ matrix @ P


def check_distinct_nodes(mesh: SurfaceMesh) -> np.ndarray:
    """Pairwise differences x_i - x_j; raises AssemblyError on duplicate nodes."""
    d = mesh.nodes[:, None, :] - mesh.nodes[None, :, :]
    r = np.linalg.norm(d, axis=-1)
    np.fill_diagonal(r, np.inf)
    i, j = np.unravel_index(np.argmin(r), r.shape)
    if r[i, j] <= DUPLICATE_TOLERANCE:
        raise AssemblyError(f"duplicate nodes {i} and {j} at {tuple(mesh.nodes[i])}")
    return d


def disk_self_term(mesh: SurfaceMesh, p: KernelParams) -> np.ndarray:
    """Integral of exp(ikr)/(4 pi r) over the disk of area w_i: (exp(ik rho) - 1)/(2ik)."""
    rho = np.sqrt(mesh.weights / np.pi)
    k = p.k
    if abs(k) < 1e-14:
        return rho / 2.0 + 0j
    return np.expm1(1j * k * rho) / (2j * k)


def is_planar(mesh: SurfaceMesh) -> bool:
    normal = mesh.normals[0]
    heights = mesh.nodes @ normal
    return bool(np.all(np.abs(mesh.normals - normal) <= PLANAR_TOLERANCE)
                and np.ptp(heights) <= PLANAR_TOLERANCE * max(1.0, float(np.max(np.abs(mesh.nodes)))))


def generic_matrix(mesh: SurfaceMesh, p: KernelParams, kernel: str = "dirac") -> np.ndarray:
    evaluate, matrices = KERNELS[kernel]
    d = check_distinct_nodes(mesh)
    n = mesh.size
    diag = np.arange(n)
    d[diag, diag] = [0.0, 0.0, 1.0]
    values = evaluate(d, p) * mesh.weights[None, :, None]
    values[diag, diag] = 0.0
    self_term = disk_self_term(mesh, p)
    if kernel == "dirac":
        # odd alpha parts vanish on the symmetric disk
        values[diag, diag, 0] = p.z * self_term
        values[diag, diag, 1] = p.m * self_term
    else:
        values[diag, diag, 0] = self_term
    blocks = np.einsum("ijc,cab->iajb", values, matrices)
    return blocks.reshape(4 * n, 4 * n)


def _assemble(mesh: SurfaceMesh, p: KernelParams, kernel: str, label: OperatorLabel,
              threads: Optional[int]) -> BoundaryOperator:
    start = time.perf_counter()
    if mesh.is_sphere:
        matrix = compress(mesh, sphere_layer_matrix(mesh, p, 0.0, kernel, threads))
    elif kernel == "dirac" and not is_planar(mesh):
        raise CapabilityError(f"principal-value assembly of {label.value} on a {mesh.kind.value} mesh needs a sphere "
                              "or a planar grid")
    else:
        matrix = generic_matrix(mesh, p, kernel)
    logger.debug("assembled %s on %d nodes (m=%g, z=%s) in %.2fs", label.value, mesh.size, p.m, p.z,
                 time.perf_counter() - start)
    return BoundaryOperator(matrix=matrix, mesh=mesh, label=label, m=p.m, z=p.z)


def assemble_cauchy(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None) -> BoundaryOperator:
    return _assemble(mesh, p, "dirac", OperatorLabel.CAUCHY, threads)


def assemble_lambda(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None) -> BoundaryOperator:
    """Lambda = beta/2 (blockwise) + C."""
    cauchy = assemble_cauchy(mesh, p, threads)
    half_beta = np.kron(np.eye(mesh.size), 0.5 * BETA)
    return BoundaryOperator(matrix=cauchy.matrix + half_beta, mesh=mesh, label=OperatorLabel.LAMBDA,
                            m=p.m, z=p.z)


def assemble_single_layer(mesh: SurfaceMesh, p: KernelParams, threads: Optional[int] = None) -> BoundaryOperator:
    return _assemble(mesh, p, "scalar", OperatorLabel.SINGLE_LAYER, threads)
