"""Principal symbols of the Cauchy operator and of the Poincare-Steklov operators.

Frequencies are 3-vectors; a 2-vector xi is read as (xi_1, xi_2, 0). All functions
broadcast over leading axes.
"""
import numpy as np

from ..clifford import alpha_dot, projector, spin_dot
from ..geometry import ChartMetric
from ..shared.errors import DomainError

# Configuration
DEGENERACY_TOLERANCE = 1e-14


def as_frequency(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] == 2:
        xi = np.concatenate([xi, np.zeros(xi.shape[:-1] + (1,))], axis=-1)
    return xi


def _wedge(xi, n):
    n = np.asarray(n, dtype=float)
    xi = as_frequency(xi)
    w = np.cross(xi, n)
    return w, np.linalg.norm(w, axis=-1), n


def cauchy_principal_symbol(metric: ChartMetric, xi) -> np.ndarray:
    """(1/2) alpha.v with v = (G^-1 xi, <grad chi, G^-1 xi>) / <G^-1 xi, xi>^(1/2)."""
    xi = np.asarray(xi, dtype=float)
    if np.any(np.linalg.norm(xi, axis=-1) == 0):
        raise DomainError("the Cauchy symbol is homogeneous of order 0 and undefined at xi = 0")
    g_xi = xi @ metric.Ginv.T
    norm = np.sqrt(np.sum(g_xi * xi, axis=-1))
    v = np.concatenate([g_xi, (g_xi @ metric.grad_chi)[..., None]], axis=-1) / norm[..., None]
    return 0.5 * alpha_dot(v)


def ps_classical_symbol(n, xi) -> np.ndarray:
    """S.(xi ^ n)/|xi ^ n| P_-(n)."""
    w, size, n = _wedge(xi, n)
    if np.any(size <= DEGENERACY_TOLERANCE * np.maximum(np.linalg.norm(as_frequency(xi), axis=-1), 1.0)):
        raise DomainError("frequency parallel to the normal has no tangential part")
    return spin_dot(w / size[..., None]) @ projector(n, -1)


def _semiclassical_factor(size: np.ndarray) -> np.ndarray:
    return 1.0 / (np.sqrt(size ** 2 + 1.0) + 1.0)


def ps_semiclassical_symbol(n, hxi) -> np.ndarray:
    """S.(h xi ^ n) P_-(n) / (sqrt(|h xi ^ n|^2 + 1) + 1), regular at h xi = 0."""
    w, size, n = _wedge(hxi, n)
    return (_semiclassical_factor(size)[..., None, None] * spin_dot(w)) @ projector(n, -1)


def exterior_semiclassical_symbol(n, hxi) -> np.ndarray:
    """Principal symbol of the exterior operator: -S.(h xi ^ n) P_+(n) / (sqrt(.) + 1)."""
    w, size, n = _wedge(hxi, n)
    return -(_semiclassical_factor(size)[..., None, None] * spin_dot(w)) @ projector(n, +1)


def xi_symbol(n, hxi) -> np.ndarray:
    """Scalar symbol (s + 1)/(s + 1 + |h xi ^ n|), s = sqrt(|h xi ^ n|^2 + 1), of the Krein block Xi."""
    _, size, _ = _wedge(hxi, n)
    s = np.sqrt(size ** 2 + 1.0)
    return (s + 1.0) / (s + 1.0 + size)
