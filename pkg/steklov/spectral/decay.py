"""Large-mass decay of the exterior resolvent, its P_- trace and the exterior extension.

Outside the sphere r = R a spinor in the channel kappa reads (g Omega_kappa, i f Omega_-kappa),
with

    ||u||^2          = int_R^inf (|g|^2 + |f|^2) r^2 dr
    ||P_-+ t u||^2   = R^2 |g(R) +- f(R)|^2 / 2.

The exterior problem with mass m + M keeps g - f = 0 at r = R. Volume sources are radial
shells of width 1/(m + M) at distance 1/(m + M) from the surface and extension data live in
channels of degree l proportional to M, so the bounds are reached at every coupling while
all integrals stay one-dimensional.
"""
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..bem import BoundaryOperator, assemble_lambda, invert_dense
from ..geometry import SurfaceMesh, shell_grid
from ..kernels import KernelParams
from ..radial import decaying_pair_real, orbital_degrees, regular_pair_real
from ..shared.errors import ArgumentError, CapabilityError
from ..shared.models import RateFit
from .rates import rate_fit
from .resolvent import LiftedField

logger = logging.getLogger(__name__)

# Configuration
LAYER_DEPTH = 30.0
RADIAL_NODES = 3001
SHELL_OFFSET = 1.0
SHELL_WIDTH = 1.0
SOURCE_KAPPA = -1
FREQUENCY_RATIO = 1.0
SHELL_RADIAL_POINTS = 8

TREND_NAMES = ("exterior_resolvent", "exterior_trace", "extension", "extension_h_half")


def _energy(z: complex, mass: float) -> float:
    if complex(z).imag != 0.0:
        raise ArgumentError(f"channel decay needs a real spectral parameter, got {z}")
    E = float(complex(z).real)
    if abs(E) >= mass:
        raise ArgumentError(f"spectral parameter {E} is not in the gap of mass {mass}")
    return E


def layer_grid(R: float, mass: float) -> np.ndarray:
    return R + np.linspace(0.0, LAYER_DEPTH / mass, RADIAL_NODES)


def radial_norm(r: np.ndarray, g: np.ndarray, f: np.ndarray) -> float:
    return float(np.sqrt(trapezoid((np.abs(g) ** 2 + np.abs(f) ** 2) * r ** 2, r)))


def shell_profile(r: np.ndarray, R: float, mass: float) -> np.ndarray:
    """exp(-(r - R - d)^2 / (2 w^2)) with d = SHELL_OFFSET / mass and w = SHELL_WIDTH / mass."""
    d, w = SHELL_OFFSET / mass, SHELL_WIDTH / mass
    return np.exp(-((r - R - d) ** 2) / (2.0 * w * w))


def exterior_channel_resolvent(kappa: int, E: float, mass: float, R: float, source: np.ndarray,
                               r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(g, f) of the exterior resolvent applied to the upper-component source a(r) Omega_kappa.

    Variation of parameters on Y' = A Y + (0, a) with y_b meeting g - f = 0 at R and y_d
    decaying; both coefficient integrals run away from the end where they vanish.
    """
    g_r, f_r = regular_pair_real(kappa, E, mass, r)
    g_d, f_d = decaying_pair_real(kappa, E, mass, r)
    g_b = g_r * (g_d[0] - f_d[0]) - g_d * (g_r[0] - f_r[0])
    f_b = f_r * (g_d[0] - f_d[0]) - f_d * (g_r[0] - f_r[0])
    wronskian = g_b * f_d - g_d * f_b
    along_b = g_d * source / wronskian
    along_d = g_b * source / wronskian
    tail = cumulative_trapezoid(along_b[::-1], -r[::-1], initial=0.0)[::-1]
    head = cumulative_trapezoid(along_d, r, initial=0.0)
    return g_b * tail + g_d * head, f_b * tail + f_d * head


def shell_source_decay(R: float, m: float, M: float, z: complex = 0.0,
                       kappa: int = SOURCE_KAPPA) -> Tuple[float, float]:
    """(||R~ f|| / ||f||, ||G_- R~ f|| / ||f||) for the shell source touching the surface."""
    mass = m + M
    E = _energy(z, mass)
    r = layer_grid(R, mass)
    a = shell_profile(r, R, mass)
    g, f = exterior_channel_resolvent(kappa, E, mass, R, a, r)
    size = float(np.sqrt(trapezoid(a ** 2 * r ** 2, r)))
    trace = R * abs(g[0] + f[0]) / np.sqrt(2.0)
    return radial_norm(r, g, f) / size, trace / size


def channel_degree(M: float, R: float) -> int:
    return max(1, int(round(FREQUENCY_RATIO * M * R)))


def channel_extension(kappa: int, E: float, mass: float, R: float) -> Tuple[float, float, float]:
    """(||E^e psi||, ||psi||_L2, ||psi||_H1/2) for psi = e_+ in the channel kappa."""
    r = layer_grid(R, mass)
    g, f = decaying_pair_real(kappa, E, mass, r)
    scale = (g[0] - f[0]) / np.sqrt(2.0)
    g, f = g / scale, f / scale
    l, lbar = orbital_degrees(kappa)
    weight = 0.5 * (np.sqrt(1.0 + l * (l + 1.0) / R ** 2) + np.sqrt(1.0 + lbar * (lbar + 1.0) / R ** 2))
    return radial_norm(r, g, f), R, R * np.sqrt(weight)


def extension_decay(R: float, m: float, M: float, z: complex = 0.0) -> float:
    """||E^e psi|| / ||psi||_H1/2 for P_+ data of degree l proportional to M."""
    mass = m + M
    E = _energy(z, mass)
    size, _, h_half = channel_extension(-(channel_degree(M, R) + 1), E, mass, R)
    return size / h_half


def nystrom_extension(mesh: SurfaceMesh, m: float, M: float, z: complex = 0.0, threads: Optional[int] = None,
                      n_radial: int = SHELL_RADIAL_POINTS,
                      lambda_inverse: Optional[BoundaryOperator] = None) -> float:
    """||Phi Lambda^-1 psi|| over a shell of thickness 1/(m + M), for a fixed smooth P_+ datum."""
    mass = m + M
    p = KernelParams(m=mass, z=z)
    R = mesh.R
    datum = np.zeros((mesh.size, 4), dtype=complex)
    datum[:, 0] = 1.0 + mesh.nodes[:, 0] / R
    psi = mesh.field(datum).project(+1)
    if lambda_inverse is None:
        lambda_inverse = invert_dense(assemble_lambda(mesh, p, threads))
    extension = LiftedField(mesh=mesh, params=p, density=lambda_inverse.matrix @ psi.flat, scale=1.0,
                            threads=threads)
    shell = shell_grid(R, 1.0 / mass, n_radial, mesh.order)
    return shell.norm(extension(shell.points)) / psi.norm()


def decay_trends(mesh: SurfaceMesh, m: float, couplings: List[float], z: complex = 0.0,
                 threads: Optional[int] = None,
                 n_radial: int = SHELL_RADIAL_POINTS) -> Dict[str, Tuple[List[float], RateFit]]:
    """Measured large-mass decays with log-log fits.

    exterior_resolvent:  ||R~ f|| / ||f||              (expected slope -1)
    exterior_trace:      ||G_- R~ f|| / ||f||          (expected slope -1/2)
    extension:           ||E^e psi|| / ||psi||, smooth psi on the mesh  (-1/2)
    extension_h_half:    ||E^e psi|| / ||psi||_H1/2, degree ~ M         (-1)
    """
    if not mesh.is_sphere:
        raise CapabilityError("decay trends integrate over sphere shells")
    R = mesh.R
    measured = {name: [] for name in TREND_NAMES}
    for M in couplings:
        resolvent, trace = shell_source_decay(R, m, M, z)
        measured["exterior_resolvent"].append(resolvent)
        measured["exterior_trace"].append(trace)
        measured["extension"].append(nystrom_extension(mesh, m, M, z, threads, n_radial))
        measured["extension_h_half"].append(extension_decay(R, m, M, z))
        logger.info("decay M=%g: %s", M, ", ".join(f"{k}={v[-1]:.3e}" for k, v in measured.items()))
    return {name: (values, rate_fit(zip(couplings, values))) for name, values in measured.items()}
