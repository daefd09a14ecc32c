"""Polar quadrature centered at a point of a sphere.

The rule lives in the frame where the center is the north pole: Gauss-Legendre panels in
the polar angle, geometrically graded towards the pole, and a trapezoid rule in the
azimuth. For a target on the axis the kernel depends on the azimuth only through
cos and sin, so the odd principal-value part integrates to zero ring by ring.
"""
import math
from typing import List

import numpy as np
from pydantic import BaseModel
from scipy.special import roots_legendre

# Configuration
MIN_PANEL_POINTS = 10
SURFACE_TOLERANCE = 1e-12
EXTRA_PANEL_POINTS = 8
EXTRA_AZIMUTHS = 2


class PolarRule(BaseModel):
    theta: np.ndarray
    theta_weights: np.ndarray
    phi: np.ndarray
    phi_weights: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @property
    def size(self) -> int:
        return self.theta.size * self.phi.size

    def local_directions(self) -> np.ndarray:
        """Unit vectors (Q, 3) in the pole frame, theta-major."""
        st, ct = np.sin(self.theta), np.cos(self.theta)
        return np.stack([
            np.outer(st, np.cos(self.phi)).ravel(),
            np.outer(st, np.sin(self.phi)).ravel(),
            np.repeat(ct, self.phi.size),
        ], axis=1)

    def weights(self, R: float) -> np.ndarray:
        """Surface weights on the sphere of radius R, including the sin(theta) Jacobian."""
        return (np.outer(self.theta_weights, self.phi_weights) * R * R).ravel()


def panel_edges(scale: float) -> List[float]:
    if scale >= 0.5 * np.pi:
        return [0.0, np.pi]
    edges = [0.0, scale]
    while 2.0 * edges[-1] < np.pi:
        edges.append(2.0 * edges[-1])
    if np.pi - edges[-1] < 0.5 * (edges[-1] - edges[-2]):
        edges[-1] = np.pi
    else:
        edges.append(np.pi)
    return edges


def polar_rule(L: int, scale: float = np.pi) -> PolarRule:
    """Rule resolving band-limited densities of degree < L and kernel structure at `scale`."""
    nodes, weights = [], []
    edges = panel_edges(scale)
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(MIN_PANEL_POINTS, math.ceil(L * (b - a) / np.pi) + EXTRA_PANEL_POINTS)
        x, w = roots_legendre(n)
        nodes.append(0.5 * (b - a) * (x + 1.0) + a)
        weights.append(0.5 * (b - a) * w)
    theta = np.concatenate(nodes)
    n_phi = L + EXTRA_AZIMUTHS
    return PolarRule(
        theta=theta,
        theta_weights=np.concatenate(weights) * np.sin(theta),
        phi=2.0 * np.pi * np.arange(n_phi) / n_phi,
        phi_weights=np.full(n_phi, 2.0 * np.pi / n_phi),
    )


def singular_scale(R: float, k: complex, offset: float = 0.0) -> float:
    """Polar-angle scale of the near-singular kernel structure."""
    scale = np.pi
    if abs(k) > 0:
        scale = min(scale, 1.0 / (R * abs(k)))
    if abs(offset) > SURFACE_TOLERANCE * R:
        scale = min(scale, abs(offset) / R)
    return scale


def pole_rotations(unit: np.ndarray) -> np.ndarray:
    """Rotations Rz(phi) Ry(theta) taking e3 to each unit vector; shape (n, 3, 3)."""
    unit = np.atleast_2d(unit)
    theta = np.arccos(np.clip(unit[:, 2], -1.0, 1.0))
    phi = np.arctan2(unit[:, 1], unit[:, 0])
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    rot = np.empty((unit.shape[0], 3, 3))
    rot[:, 0] = np.stack([cp * ct, -sp, cp * st], axis=1)
    rot[:, 1] = np.stack([sp * ct, cp, sp * st], axis=1)
    rot[:, 2] = np.stack([-st, np.zeros_like(st), ct], axis=1)
    return rot
