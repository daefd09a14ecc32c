"""Eigen-structure of the boundary-normal generator L0 on a graph chart.

In the chart y -> (y, chi(y)) the equation (D_m - z) u = 0, scaled by h = 1/m, reads
h d_tau u = L0(y, h D_y) u + h L1(y) u with

    L0 = i alpha.n / sqrt(g) (alpha.xi + beta),   L1 = -i z alpha.n / sqrt(g),

g = 1 + |grad chi|^2 and n the pulled-back outward normal.
"""

import numpy as np
from pydantic import BaseModel

from ..clifford import ALPHA, BETA, I4, alpha_dot, projector, spin_dot
from ..geometry.charts import Chart, as_chart, normal_from_gradient
from ..shared.models import Complex
from .principal import as_frequency


class L0Eigen(BaseModel):
    L0: np.ndarray
    L1: np.ndarray
    rho_plus: Complex
    rho_minus: Complex
    Pi_plus: np.ndarray
    Pi_minus: np.ndarray
    lam: float
    k_plus: float
    k_minus: float
    Theta: np.ndarray
    normal: np.ndarray
    g: float
    P_plus: np.ndarray
    P_minus: np.ndarray

    class Config:
        arbitrary_types_allowed = True


def chart_frame(chart: Chart, y):
    """(n, g) at the chart point y."""
    grad = chart.gradient(np.asarray(y, dtype=float))
    return normal_from_gradient(grad), 1.0 + float(grad @ grad)


def generator(n: np.ndarray, g: float, xi) -> np.ndarray:
    return 1j * alpha_dot(n) @ (alpha_dot(as_frequency(xi)) + BETA) / np.sqrt(g)


def generator_xi_derivatives(n: np.ndarray, g: float) -> np.ndarray:
    """d L0 / d xi_i for i = 1, 2; shape (2, 4, 4)."""
    an = 1j * alpha_dot(n) / np.sqrt(g)
    return np.stack([an @ ALPHA[0], an @ ALPHA[1]])


def l0_eigendecomp(chart: Chart, y, xi, z: complex = 0.0) -> L0Eigen:
    chart = as_chart(chart)
    n, g = chart_frame(chart, y)
    xi3 = as_frequency(xi)
    w = np.cross(n, xi3)
    lam = float(np.sqrt(w @ w + 1.0))
    root_g = np.sqrt(g)
    rho_plus = complex((1j * (n @ xi3) + lam) / root_g)
    rho_minus = complex((1j * (n @ xi3) - lam) / root_g)
    Sw = spin_dot(w)
    reflection = (Sw - 1j * BETA @ alpha_dot(n)) / lam
    return L0Eigen(
        L0=generator(n, g, xi3),
        L1=-1j * complex(z) * alpha_dot(n) / root_g,
        rho_plus=rho_plus,
        rho_minus=rho_minus,
        Pi_plus=0.5 * (I4 + reflection),
        Pi_minus=0.5 * (I4 - reflection),
        lam=lam,
        k_plus=0.5 * (1.0 + 1.0 / lam),
        k_minus=0.5 * (1.0 - 1.0 / lam),
        Theta=Sw / (2.0 * lam),
        normal=n,
        g=g,
        P_plus=projector(n, +1),
        P_minus=projector(n, -1),
    )


def reconstruct(A: np.ndarray, n, Pi_plus: np.ndarray, k_plus: float) -> np.ndarray:
    """A from its P_- part and its Pi_+ part: (I - P_+ Pi_+/k_+) P_- A + (P_+/k_+) Pi_+ A."""
    P_plus, P_minus = projector(n, +1), projector(n, -1)
    return (I4 - P_plus @ Pi_plus / k_plus) @ P_minus @ A + (P_plus / k_plus) @ Pi_plus @ A


def eigen_residuals(e: L0Eigen) -> dict:
    """Largest entrywise residual of each algebraic relation of the decomposition."""
    def size(a):
        return float(np.max(np.abs(a)))

    Pp, Pm = e.P_plus, e.P_minus
    return {
        "spectral_decomposition": size(e.L0 - e.rho_plus * e.Pi_plus - e.rho_minus * e.Pi_minus),
        "partition": size(e.Pi_plus + e.Pi_minus - I4),
        "idempotent": max(size(e.Pi_plus @ e.Pi_plus - e.Pi_plus), size(e.Pi_minus @ e.Pi_minus - e.Pi_minus)),
        "orthogonal": size(e.Pi_plus @ e.Pi_minus),
        "diagonal_blocks": max(size(Pp @ e.Pi_plus @ Pp - e.k_plus * Pp), size(Pm @ e.Pi_minus @ Pm - e.k_plus * Pm)),
        "off_diagonal_blocks": max(size(Pp @ e.Pi_minus @ Pm + e.Theta @ Pm), size(Pm @ e.Pi_plus @ Pp - e.Theta @ Pp)),
    }


def ellipticity_constant(chart: Chart, points, frequencies) -> float:
    """min over samples of +-Re rho_+-(y, xi) / <xi>."""
    chart = as_chart(chart)
    best = np.inf
    for y in np.atleast_2d(points):
        for xi in np.atleast_2d(frequencies):
            e = l0_eigendecomp(chart, y, xi)
            bracket = np.sqrt(1.0 + float(np.asarray(xi) @ np.asarray(xi)))
            best = min(best, e.rho_plus.real / bracket, -e.rho_minus.real / bracket)
    return float(best)
