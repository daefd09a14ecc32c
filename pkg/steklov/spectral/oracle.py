"""Radial eigenvalue oracles on the ball: MIT bag and step-mass operators.

Roots of the channel conditions of steklov.radial are bracketed on a fine energy grid
and polished with brentq.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.integrate import quad
from scipy.optimize import brentq

from ..geometry import SurfaceMesh, TraceField
from ..geometry.harmonics import cartesian_angles, harmonic_matrix, spinor_harmonic
from ..radial import mit_condition, regular_pair_real, step_condition
from ..shared.errors import ArgumentError
from ..shared.models import OracleEigenvalue

logger = logging.getLogger(__name__)

# Configuration
ORACLE_GRID = 4000
ENDPOINT_MARGIN = 1e-9
ROOT_TOLERANCE = 1e-13


def _window(R: float, m: float, M: Optional[float], kappa: int, count: int,
            window: Optional[Tuple[float, float]]) -> Tuple[float, float]:
    lo, hi = (m, np.inf) if M is None else (m, m + M)
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    if not np.isfinite(hi):
        # MIT roots are spaced by about pi / R in momentum
        p_max = (count + abs(kappa) + 2) * np.pi / R
        hi = np.sqrt(p_max ** 2 + m * m)
    span = hi - lo
    return lo + ENDPOINT_MARGIN * max(span, 1.0), hi - ENDPOINT_MARGIN * max(span, 1.0)


def radial_oracle(R: float, m: float, M: Optional[float] = None, kappa: int = -1, count: int = 1,
                  window: Optional[Tuple[float, float]] = None) -> List[float]:
    """Lowest `count` positive eigenvalues in channel kappa: MIT bag when M is None, step mass otherwise."""
    if R <= 0 or m <= 0:
        raise ArgumentError(f"R and m must be positive, got R={R}, m={m}")
    if kappa == 0:
        raise ArgumentError("kappa must be a non-zero integer")
    if count <= 0:
        return []
    lo, hi = _window(R, m, M, kappa, count, window)
    if not lo < hi:
        return []
    if M is None:
        def condition(E):
            return mit_condition(kappa, E, m, R)
    else:
        def condition(E):
            return step_condition(kappa, E, m, m + M, R)
    energies = np.linspace(lo, hi, ORACLE_GRID)
    values = np.array([condition(E) for E in energies])
    roots = []
    for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]:
        roots.append(float(brentq(condition, energies[i], energies[i + 1], xtol=ROOT_TOLERANCE)))
        if len(roots) == count:
            break
    logger.debug("oracle kappa=%d M=%s: %s", kappa, M, roots)
    return roots


def oracle_spectrum(R: float, m: float, M: Optional[float] = None, window: Tuple[float, float] = (1.0, 2.5),
                    kappa_max: int = 3) -> List[OracleEigenvalue]:
    """Every oracle eigenvalue in the window for 1 <= |kappa| <= kappa_max, with degeneracy 2|kappa|."""
    found = []
    for k in range(1, kappa_max + 1):
        for kappa in (-k, k):
            for value in radial_oracle(R, m, M, kappa, count=ORACLE_GRID, window=window):
                found.append(OracleEigenvalue(value=value, kappa=kappa, degeneracy=2 * k))
    return sorted(found, key=lambda e: e.value)


class MITEigenfunction(BaseModel):
    """psi = (g(r) Omega_{kappa,mu}, i f(r) Omega_{-kappa,mu}) / norm on the ball of radius R."""

    R: float
    m: float
    E: float
    kappa: int
    mu2: int
    norm: float

    def radial(self, r):
        g, f = regular_pair_real(self.kappa, self.E, self.m, r)
        return g / self.norm, f / self.norm

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(points, axis=1)
        unit = np.where(r[:, None] > 0, points / np.where(r > 0, r, 1.0)[:, None], np.array([0.0, 0.0, 1.0]))
        theta, phi = cartesian_angles(unit)
        L = abs(self.kappa) + 2
        Y = harmonic_matrix(L, theta, phi)
        upper = spinor_harmonic(self.kappa, self.mu2, unit, Y, L)
        lower = spinor_harmonic(-self.kappa, self.mu2, unit, Y, L)
        g, f = self.radial(r)
        return np.concatenate([g[:, None] * upper, 1j * f[:, None] * lower], axis=1)

    def trace(self, mesh: SurfaceMesh) -> TraceField:
        return mesh.field(self(mesh.nodes))


def oracle_eigenfunction(R: float, m: float, E: float, kappa: int, mu2: int) -> MITEigenfunction:
    """L^2-normalized eigenspinor in channel (kappa, mu2 = 2 mu)."""
    if abs(mu2) > 2 * abs(kappa) - 1 or mu2 % 2 == 0:
        raise ArgumentError(f"mu2 must be odd with |mu2| <= 2|kappa| - 1, got {mu2}")

    def density(r):
        g, f = regular_pair_real(kappa, E, m, r)
        return float((g * g + f * f) * r * r)

    integral, _ = quad(density, 0.0, R, limit=200)
    return MITEigenfunction(R=R, m=m, E=E, kappa=kappa, mu2=mu2, norm=float(np.sqrt(integral)))
