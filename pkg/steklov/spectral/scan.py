"""Eigenvalue scans through the smallest singular value of a boundary operator family.

Birman-Schwinger: a is an eigenvalue of the step-mass operator iff Psi(a) has a kernel.
MIT: a is an MIT eigenvalue iff (I - C(a)) has a kernel on the P_+ range, C the
Calderon projector.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import ClassVar, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.linalg import svdvals
from scipy.optimize import minimize_scalar

from ..bem import calderon_projector, channel_vectors
from ..clifford import projector
from ..geometry import SurfaceMesh
from ..kernels import KernelParams
from ..shared.errors import ArgumentError, BracketError, SteklovError
from ..shared.models import EigenResult, SpectralScan
from ..shared.settings import get_thread_count
from .krein import ps_pair, psi_operator

logger = logging.getLogger(__name__)

# Configuration
BRANCH_MARGIN = 0.05
REFINE_WIDTH = 1e-6
MULTIPLICITY_FACTOR = 10.0
MULTIPLICITY_FLOOR = 1e-8
ROOT_FRACTION = 1e-2
MIN_STEPS = 8


class ScanProblem(BaseModel):
    """A family a -> T(a) whose singular values are scanned."""

    mesh: SurfaceMesh
    m: float
    threads: Optional[int] = None

    class Config:
        arbitrary_types_allowed = True

    label: ClassVar[str] = "scan"

    @property
    def coupling(self) -> Optional[float]:
        return None

    def branch_points(self) -> List[float]:
        return [self.m]

    def singular_values(self, a: float) -> np.ndarray:
        raise NotImplementedError

    def sigma(self, a: float) -> float:
        return float(self.singular_values(a)[-1])


class BirmanSchwinger(ScanProblem):
    M: float
    exact: bool = False

    label: ClassVar[str] = "birman_schwinger"

    @property
    def coupling(self) -> Optional[float]:
        return self.M

    def branch_points(self) -> List[float]:
        return [self.m, self.m + self.M]

    def singular_values(self, a: float) -> np.ndarray:
        interior, exterior, _, _ = ps_pair(self.mesh, self.m, self.M, a, self.threads, self.exact)
        values = psi_operator(interior, exterior).weighted()
        if not np.all(np.isfinite(values)):
            raise ArgumentError(f"Psi({a:.6g}) has non-finite entries")
        return svdvals(values)


def plus_range_basis(mesh: SurfaceMesh) -> np.ndarray:
    """Weighted-orthonormal columns spanning the P_+ range (resolved channels on spheres)."""
    if mesh.is_sphere:
        return channel_vectors(mesh)[1]
    _, vectors = np.linalg.eigh(projector(mesh.normals, +1))
    columns = np.zeros((mesh.size, 4, mesh.size, 2), dtype=complex)
    index = np.arange(mesh.size)
    columns[index, :, index, :] = vectors[:, :, 2:] / np.sqrt(mesh.weights)[:, None, None]
    return columns.reshape(4 * mesh.size, 2 * mesh.size)


class CalderonMIT(ScanProblem):
    label: ClassVar[str] = "mit"

    def singular_values(self, a: float) -> np.ndarray:
        basis = self.mesh.cached("plus_range_basis", lambda: plus_range_basis(self.mesh))
        C = calderon_projector(self.mesh, KernelParams(m=self.m, z=a), self.threads)
        complement = basis - C.matrix @ basis
        return svdvals(np.sqrt(self.mesh.spinor_weights)[:, None] * complement)


def clip_interval(interval: Tuple[float, float], problem: ScanProblem) -> Tuple[float, float]:
    """Move endpoints that sit within BRANCH_MARGIN of +-m or +-(m + M) inward."""
    lo, hi = float(interval[0]), float(interval[1])
    for point in problem.branch_points():
        for branch in (point, -point):
            if abs(lo - branch) < BRANCH_MARGIN:
                lo = branch + BRANCH_MARGIN
            if abs(hi - branch) < BRANCH_MARGIN:
                hi = branch - BRANCH_MARGIN
    if (lo, hi) != (float(interval[0]), float(interval[1])):
        logger.warning("scan window [%g, %g] moved to [%g, %g] away from kernel branch points",
                       interval[0], interval[1], lo, hi)
    if not lo < hi:
        raise ArgumentError(f"scan window [{interval[0]}, {interval[1]}] is empty after branch clipping")
    return lo, hi


def run_scan(problem: ScanProblem, interval: Tuple[float, float], steps: int) -> SpectralScan:
    if steps < MIN_STEPS:
        raise ArgumentError(f"steps must be >= {MIN_STEPS}, got {steps}")
    lo, hi = clip_interval(interval, problem)
    grid = np.linspace(lo, hi, steps)
    workers = get_thread_count(problem.threads)
    inner = problem.model_copy(update={"threads": 1})

    def evaluate(a):
        try:
            return inner.sigma(float(a))
        except (SteklovError, np.linalg.LinAlgError) as exc:
            logger.warning("scan point a=%.6g failed: %s", a, exc)
            return None

    with ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(evaluate, grid))
    failed = [i for i, v in enumerate(values) if v is None]
    sigma = [float("inf") if v is None else v for v in values]
    logger.info("%s scan over [%g, %g]: %d points, %d failed, min sigma %.3e", problem.label, lo, hi,
                steps, len(failed), min(sigma))
    return SpectralScan(grid=[float(a) for a in grid], sigma_min=sigma, failed=failed, m=problem.m,
                        M=problem.coupling, label=problem.label, problem=problem)


def bs_scan(mesh: SurfaceMesh, m: float, M: float, interval: Tuple[float, float], steps: int,
            threads: Optional[int] = None, exact: bool = False) -> SpectralScan:
    """sigma_min of Psi(a) on a uniform grid; interval inside (-(m + M), m + M)."""
    if not -(m + M) < interval[0] < interval[1] < m + M:
        raise ArgumentError(f"scan window must lie inside (-(m+M), m+M) = ({-(m + M)}, {m + M})")
    return run_scan(BirmanSchwinger(mesh=mesh, m=m, M=M, threads=threads, exact=exact), interval, steps)


def mit_scan(mesh: SurfaceMesh, m: float, interval: Tuple[float, float], steps: int,
             threads: Optional[int] = None) -> SpectralScan:
    return run_scan(CalderonMIT(mesh=mesh, m=m, threads=threads), interval, steps)


def scan_minima(scan: SpectralScan) -> List[Tuple[int, int]]:
    """Index brackets (i - 1, i + 1) around strict interior local minima of sigma_min."""
    s = scan.sigma_min
    bad = set(scan.failed)
    return [(i - 1, i + 1) for i in range(1, len(s) - 1)
            if not {i - 1, i, i + 1} & bad and s[i] < s[i - 1] and s[i] < s[i + 1]]


def refine_eigenvalue(scan: SpectralScan, bracket: Tuple[int, int],
                      problem: Optional[ScanProblem] = None) -> EigenResult:
    """Golden-section minimum of sigma_min(a) inside the scan bracket, to width REFINE_WIDTH * m.

    The problem defaults to the one recorded on the scan.
    """
    if problem is None:
        problem = scan.problem
    if problem is None:
        raise ArgumentError("refinement needs the scan problem; pass it or use a scan from run_scan")
    i, j = bracket
    if not 0 <= i < j < len(scan.grid) or j - i < 2:
        raise ArgumentError(f"bracket {bracket} must hold two grid indices at least two apart")
    lo, hi = scan.grid[i], scan.grid[j]
    interior = range(i + 1, j)
    mid = min(interior, key=lambda k: scan.sigma_min[k])
    if not (scan.sigma_min[mid] < scan.sigma_min[i] and scan.sigma_min[mid] < scan.sigma_min[j]):
        raise BracketError(f"no interior minimum of sigma_min in [{lo:.6g}, {hi:.6g}]")
    a = scan.grid[mid]
    result = minimize_scalar(problem.sigma, bracket=(lo, a, hi), method="golden",
                             tol=REFINE_WIDTH * problem.m / (2.0 * max(abs(a), problem.m)))
    value = float(result.x)
    singular = problem.singular_values(value)
    residual = float(singular[-1])
    threshold = MULTIPLICITY_FACTOR * residual + MULTIPLICITY_FLOOR
    hint = int(np.sum(singular <= threshold))
    logger.debug("refined %s root %.9f: residual %.3e, multiplicity hint %d", problem.label, value, residual, hint)
    return EigenResult(value=value, residual=residual, multiplicity_hint=hint, bracket=(lo, hi))


def refine_mit_eigenvalue(scan: SpectralScan, bracket: Tuple[int, int], mesh: SurfaceMesh,
                          threads: Optional[int] = None) -> EigenResult:
    return refine_eigenvalue(scan, bracket, CalderonMIT(mesh=mesh, m=scan.m, threads=threads))


def scan_roots(scan: SpectralScan, problem: Optional[ScanProblem] = None) -> List[EigenResult]:
    """Refine every local minimum and keep those whose residual is below ROOT_FRACTION of the scan median."""
    finite = [s for s in scan.sigma_min if np.isfinite(s)]
    scale = float(np.median(finite)) if finite else 0.0
    roots = []
    for bracket in scan_minima(scan):
        result = refine_eigenvalue(scan, bracket, problem)
        if result.residual <= ROOT_FRACTION * scale:
            roots.append(result)
        else:
            logger.debug("minimum near %.6g is not a root: residual %.3e vs scale %.3e", result.value,
                         result.residual, scale)
    return roots
