"""Quantization of symbols: Fourier multipliers on periodic grids and spectral
quantization on the sphere, used to compare operators with their principal symbols."""
import logging
from typing import Callable, Optional, Union

import numpy as np
import scipy.fft

from ..bem import BoundaryOperator, SpectralPoincareSteklov
from ..clifford import ALPHA, SPIN, alpha_dot, projector
from ..geometry import SurfaceMesh, surface_gradient
from ..shared.errors import ArgumentError, CapabilityError, DomainError, ResolutionError
from ..shared.models import OperatorLabel
from .parametrix import SymbolField
from .principal import as_frequency

logger = logging.getLogger(__name__)

# Configuration
PACKET_WIDTH = 1.0
PACKET_SUPPORT = 3.0
DIRECT_SUMMATION_LIMIT = 64

E3 = np.array([0.0, 0.0, 1.0])


def halfspace_multiplier(xi, m: float, z: complex = 0.0) -> np.ndarray:
    """-i alpha_3 (alpha.xi - z) P_-(-e3) / (sqrt(|xi|^2 + m^2) + m) for xi of shape (..., 2)."""
    if m <= 0:
        raise ArgumentError(f"mass must be positive, got {m}")
    xi = as_frequency(xi)
    denominator = np.sqrt(np.sum(xi * xi, axis=-1) + m * m) + m
    numerator = -1j * ALPHA[2] @ (alpha_dot(xi) - complex(z) * np.eye(4))
    return numerator @ projector(-E3, -1) / denominator[..., None, None]


def _as_symbol(symbol) -> SymbolField:
    if isinstance(symbol, SymbolField):
        return symbol
    if callable(symbol):
        return SymbolField.from_frequency(symbol)
    return SymbolField.constant(np.asarray(symbol))


def flat_quantize(symbol: Union[SymbolField, Callable, np.ndarray], h: float, field: np.ndarray,
                  length: float = 2.0 * np.pi) -> np.ndarray:
    """Op^h(a) on a periodic (n, n, 4) spinor grid over [0, length)^2 with the unitary DFT."""
    field = np.asarray(field)
    n = field.shape[0]
    if field.ndim != 3 or field.shape[1] != n or field.shape[2] != 4:
        raise ArgumentError(f"expected an (n, n, 4) spinor grid, got shape {field.shape}")
    if n < 2 or n & (n - 1):
        raise ArgumentError(f"grid size must be a power of two, got {n}")
    symbol = _as_symbol(symbol)
    k = 2.0 * np.pi * scipy.fft.fftfreq(n, d=length / n)
    xi = np.stack(np.meshgrid(k, k, indexing="ij"), axis=-1)
    coefficients = scipy.fft.fft2(field, axes=(0, 1), norm="ortho")
    if not symbol.y_dependent:
        values = symbol(np.zeros(2), h * xi)
        return scipy.fft.ifft2(np.einsum("pqab,pqb->pqa", values, coefficients), axes=(0, 1), norm="ortho")
    if n > DIRECT_SUMMATION_LIMIT:
        raise ArgumentError(f"y-dependent symbols are quantized by direct summation on grids up to "
                            f"{DIRECT_SUMMATION_LIMIT}, got {n}")
    y = np.arange(n) * (length / n)
    points = np.stack(np.meshgrid(y, y, indexing="ij"), axis=-1).reshape(-1, 2)
    flat_xi = xi.reshape(-1, 2)
    flat_c = coefficients.reshape(-1, 4)
    out = np.empty((n * n, 4), dtype=complex)
    for i, point in enumerate(points):
        values = symbol(point, h * flat_xi)
        phase = np.exp(1j * flat_xi @ point) / n
        out[i] = np.einsum("f,fab,fb->a", phase, values, flat_c)
    return out.reshape(n, n, 4)


def surface_spin_operator(mesh: SurfaceMesh, values: np.ndarray) -> np.ndarray:
    """sum_j S_j [(-i grad_Sigma u) x n]_j for nodal spinors u of shape (N, 4)."""
    gradient = -1j * surface_gradient(mesh, values)
    wedge = np.cross(gradient, mesh.normals[:, None, :])
    return np.einsum("jab,nbj->na", SPIN, wedge)


def _mass(op) -> float:
    return op.m if isinstance(op, BoundaryOperator) else op.mass


def _packet_direction(direction, normal: np.ndarray) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    tangent = d - (d @ normal) * normal
    size = np.linalg.norm(tangent)
    if size <= 1e-12 * max(np.linalg.norm(d), 1.0):
        raise DomainError("packet direction is parallel to the normal; the symbol is undefined there")
    return tangent / size


def wavepacket_compare(op: Union[BoundaryOperator, SpectralPoincareSteklov], l: int, semiclassical: bool = False,
                       direction=None, center: Optional[int] = None, width: float = PACKET_WIDTH) -> float:
    """Relative L^2 discrepancy between op and the quantized principal symbol on a wave packet.

    The packet has frequency l, a Gaussian envelope of width width * R / sqrt(l) and is
    projected onto the data range of the operator (P_- interior, P_+ exterior). The
    prediction quantizes S.(xi ^ n)/|xi ^ n| spectrally, or its semiclassical version
    with h = 1/m; the discrepancy is measured within PACKET_SUPPORT widths of the center.
    """
    mesh = op.mesh
    if not mesh.is_sphere:
        raise CapabilityError("wave packet comparison needs a sphere mesh")
    if l <= 0:
        raise ArgumentError(f"packet frequency must be positive, got {l}")
    if mesh.order < 2 * l:
        raise ResolutionError(f"sphere order {mesh.order} cannot resolve frequency {l}; need order >= {2 * l}")
    R = mesh.R
    if center is None:
        center = int(np.argmin(np.linalg.norm(mesh.nodes - np.array([R, 0.0, 0.0]), axis=1)))
    x0, n0 = mesh.nodes[center], mesh.normals[center]
    t = _packet_direction(E3 if direction is None else direction, n0)
    exterior = op.label == OperatorLabel.PS_EXTERIOR

    radius = width * R / np.sqrt(l)
    offset = mesh.nodes - x0
    distance = np.linalg.norm(offset, axis=1)
    scalar = np.exp(-distance ** 2 / (2.0 * radius ** 2)) * np.exp(1j * l * (offset @ t) / R)
    spinor = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    data = np.einsum("nab,b->na", projector(mesh.normals, +1 if exterior else -1), spinor) * scalar[:, None]

    applied = op.apply(mesh.field(data)).values
    sh = mesh.harmonics()
    if semiclassical:
        h = 1.0 / _mass(op)

        def weight(degrees):
            return h / (np.sqrt(1.0 + h * h * degrees * (degrees + 1.0) / R ** 2) + 1.0)
    else:
        def weight(degrees):
            safe = np.maximum(degrees * (degrees + 1.0), 1.0)
            return np.where(degrees == 0, 0.0, R / np.sqrt(safe))
    predicted = surface_spin_operator(mesh, sh.multiplier(data, weight))
    if exterior:
        predicted = -predicted

    inside = distance <= PACKET_SUPPORT * radius
    w = mesh.weights[inside, None]
    error = np.sqrt(np.sum(w * np.abs(applied[inside] - predicted[inside]) ** 2))
    scale = np.sqrt(np.sum(w * np.abs(predicted[inside]) ** 2))
    logger.debug("wave packet l=%d (%s): relative error %.3e", l, "semiclassical" if semiclassical else "classical",
                 error / scale)
    return float(error / scale)
