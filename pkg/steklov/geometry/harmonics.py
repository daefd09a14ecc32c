"""Scalar and spinor spherical harmonics on Gauss-Legendre x trapezoid sphere grids.

Orthonormal harmonics with the Condon-Shortley phase, Y_lm = Pbar_lm(theta) e^{i m phi};
coefficient index lm = l^2 + l + m for 0 <= l < L.
"""
from functools import cached_property
from typing import List, Tuple

import numpy as np
import scipy.fft

from ..clifford import SIGMA

# Configuration
THETA_FD_STEP = 1e-4


def lm_index(l: int, m: int) -> int:
    return l * l + l + m


def degree_array(L: int) -> np.ndarray:
    return np.concatenate([np.full(2 * l + 1, l) for l in range(L)])


def order_array(L: int) -> np.ndarray:
    return np.concatenate([np.arange(-l, l + 1) for l in range(L)])


def legendre_table(L: int, cos_t: np.ndarray, sin_t: np.ndarray) -> np.ndarray:
    """Normalized associated Legendre values P[l, m, ...] for 0 <= m <= l < L."""
    cos_t = np.asarray(cos_t, dtype=float)
    sin_t = np.asarray(sin_t, dtype=float)
    P = np.zeros((L, L) + cos_t.shape)
    P[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, L):
        P[m, m] = -np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_t * P[m - 1, m - 1]
    for m in range(L - 1):
        P[m + 1, m] = np.sqrt(2.0 * m + 3.0) * cos_t * P[m, m]
        for l in range(m + 2, L):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[l, m] = a * (cos_t * P[l - 1, m] - b * P[l - 2, m])
    return P


def harmonic_matrix(L: int, theta, phi) -> np.ndarray:
    """Y_lm at the given angles, shape (npts, L^2)."""
    theta = np.asarray(theta, dtype=float).ravel()
    phi = np.asarray(phi, dtype=float).ravel()
    P = legendre_table(L, np.cos(theta), np.sin(theta))
    Y = np.zeros((theta.size, L * L), dtype=complex)
    for m in range(L):
        phase = np.exp(1j * m * phi)
        sign = (-1.0) ** m
        for l in range(m, L):
            value = P[l, m] * phase
            Y[:, lm_index(l, m)] = value
            if m:
                Y[:, lm_index(l, -m)] = sign * np.conj(value)
    return Y


def cartesian_angles(points) -> Tuple[np.ndarray, np.ndarray]:
    points = np.asarray(points, dtype=float)
    r = np.linalg.norm(points, axis=-1)
    theta = np.arccos(np.clip(points[..., 2] / r, -1.0, 1.0))
    phi = np.arctan2(points[..., 1], points[..., 0])
    return theta, phi


def sigma_dot(points) -> np.ndarray:
    return np.einsum("...j,jab->...ab", np.asarray(points), SIGMA)


class SphereHarmonics:
    """Transforms between grid samples and harmonic coefficients on a sphere grid."""

    def __init__(self, R: float, cos_theta: np.ndarray, gl_weights: np.ndarray, n_phi: int, L: int):
        self.R = R
        self.L = L
        self.cos_theta = cos_theta
        self.theta = np.arccos(cos_theta)
        self.gl_weights = gl_weights
        self.n_theta = cos_theta.size
        self.n_phi = n_phi
        self.phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        self.table = legendre_table(L, cos_theta, np.sqrt(1.0 - cos_theta ** 2))
        self.degrees = degree_array(L)
        self.orders = order_array(L)

    @property
    def size(self) -> int:
        return self.L * self.L

    def _full_table(self, table: np.ndarray) -> np.ndarray:
        """Pbar for all (l, m), shape (L^2, n_theta), with the (-1)^m sign for m < 0."""
        out = np.zeros((self.size, table.shape[-1]))
        for l in range(self.L):
            for m in range(-l, l + 1):
                out[lm_index(l, m)] = table[l, abs(m)] * ((-1.0) ** m if m < 0 else 1.0)
        return out

    @cached_property
    def full_table(self) -> np.ndarray:
        return self._full_table(self.table)

    @cached_property
    def theta_derivative_table(self) -> np.ndarray:
        h = THETA_FD_STEP
        stencil = []
        for shift in (-2, -1, 1, 2):
            t = self.theta + shift * h
            stencil.append(self._full_table(legendre_table(self.L, np.cos(t), np.sin(t))))
        return (stencil[0] - 8.0 * stencil[1] + 8.0 * stencil[2] - stencil[3]) / (12.0 * h)

    def analysis(self, values: np.ndarray) -> np.ndarray:
        """Grid samples (N, ...) on the unit-normalized sphere to coefficients (L^2, ...)."""
        values = np.asarray(values)
        rest = values.shape[1:]
        grid = values.reshape((self.n_theta, self.n_phi) + rest)
        F = scipy.fft.fft(grid, axis=1) * (2.0 * np.pi / self.n_phi)
        m_index = self.orders % self.n_phi
        weighted = F * self.gl_weights.reshape((-1, 1) + (1,) * len(rest))
        # c_lm = sum_i w_i Pbar_lm(theta_i) F_m(i)
        picked = weighted[:, m_index]
        return np.einsum("qt,tq...->q...", self.full_table, picked)

    def synthesis(self, coeffs: np.ndarray, table: np.ndarray = None) -> np.ndarray:
        coeffs = np.asarray(coeffs)
        rest = coeffs.shape[1:]
        table = self.full_table if table is None else table
        weighted = table[:, :, None] * coeffs.reshape((self.size, 1, -1))
        G = np.zeros((self.n_theta, self.n_phi, weighted.shape[-1]), dtype=complex)
        np.add.at(G, (slice(None), self.orders % self.n_phi), np.transpose(weighted, (1, 0, 2)))
        values = scipy.fft.ifft(G, axis=1) * self.n_phi
        return values.reshape((self.n_theta * self.n_phi,) + rest)

    def evaluate(self, coeffs: np.ndarray, points) -> np.ndarray:
        theta, phi = cartesian_angles(points)
        return harmonic_matrix(self.L, theta, phi) @ np.asarray(coeffs)

    @cached_property
    def grid_matrix(self) -> np.ndarray:
        theta = np.repeat(self.theta, self.n_phi)
        phi = np.tile(self.phi, self.n_theta)
        return harmonic_matrix(self.L, theta, phi)

    @cached_property
    def analysis_matrix(self) -> np.ndarray:
        """A[lm, j] = w_j conj(Y_lm(x_j)) with unit-sphere weights."""
        w = np.repeat(self.gl_weights, self.n_phi) * (2.0 * np.pi / self.n_phi)
        return np.conj(self.grid_matrix).T * w[None, :]

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """Surface gradient of scalar samples (N,) or (N, k); returns (N, 3) or (N, k, 3)."""
        values = np.asarray(values)
        flat = values.reshape(values.shape[0], -1)
        c = self.analysis(flat)
        d_theta = self.synthesis(c, table=self.theta_derivative_table)
        d_phi = self.synthesis(1j * self.orders[:, None] * c)
        theta = np.repeat(self.theta, self.n_phi)
        phi = np.tile(self.phi, self.n_theta)
        e_theta = np.stack([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)], -1)
        e_phi = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], -1)
        grad = (d_theta[:, :, None] * e_theta[:, None, :]
                + (d_phi / np.sin(theta)[:, None])[:, :, None] * e_phi[:, None, :]) / self.R
        return grad.reshape(values.shape + (3,))

    def sobolev(self, values: np.ndarray, s: float) -> np.ndarray:
        """(1 - Delta)^{s/2} on the resolved band; unresolved content passes unchanged."""
        if s == 0:
            return np.array(values, copy=True)
        values = np.asarray(values)
        flat = values.reshape(values.shape[0], -1)
        c = self.analysis(flat)
        w = (1.0 + self.degrees * (self.degrees + 1.0) / self.R ** 2) ** (s / 2.0)
        out = flat + self.synthesis((w - 1.0)[:, None] * c)
        return out.reshape(values.shape)

    def multiplier(self, values: np.ndarray, weight) -> np.ndarray:
        """Apply weight(l) to every degree l < L; content above the band is dropped."""
        values = np.asarray(values)
        flat = values.reshape(values.shape[0], -1)
        w = np.asarray(weight(self.degrees), dtype=complex)
        return self.synthesis(w[:, None] * self.analysis(flat)).reshape(values.shape)


# Spinor harmonics
def channel_list(j2_max: int) -> List[Tuple[int, int, int]]:
    """(j2, kappa, mu2) for all channels with 2j <= j2_max, ordered by j."""
    channels = []
    for j2 in range(1, j2_max + 1, 2):
        for kappa in (-(j2 + 1) // 2, (j2 + 1) // 2):
            for mu2 in range(-j2, j2 + 1, 2):
                channels.append((j2, kappa, mu2))
    return channels


def stretched_spinor(L: int, l: int, mu2: int, Y: np.ndarray) -> np.ndarray:
    """Omega_{kappa,mu} for kappa = -(l+1) (j = l + 1/2) from Y columns; shape (npts, 2)."""
    out = np.zeros((Y.shape[0], 2), dtype=complex)
    m_lo, m_hi = (mu2 - 1) // 2, (mu2 + 1) // 2
    mu = mu2 / 2.0
    if abs(m_lo) <= l:
        out[:, 0] = np.sqrt((l + mu + 0.5) / (2 * l + 1)) * Y[:, lm_index(l, m_lo)]
    if abs(m_hi) <= l:
        out[:, 1] = np.sqrt((l - mu + 0.5) / (2 * l + 1)) * Y[:, lm_index(l, m_hi)]
    return out


def spinor_harmonic(kappa: int, mu2: int, unit_points: np.ndarray, Y: np.ndarray, L: int) -> np.ndarray:
    """Omega_{kappa,mu} at unit points; kappa > 0 is built as -(sigma.x)Omega_{-kappa,mu}."""
    if kappa < 0:
        return stretched_spinor(L, -kappa - 1, mu2, Y)
    base = stretched_spinor(L, kappa - 1, mu2, Y)
    return -np.einsum("pab,pb->pa", sigma_dot(unit_points), base)


def resolved_basis(unit_points: np.ndarray, Y: np.ndarray, L: int, R: float, j2_max: int):
    """Columns (Omega, 0) and (0, Omega) for every channel, normalized on the sphere of radius R.

    Returns (basis (4 npts, dim), metadata list of (j2, kappa, mu2, block)).
    """
    channels = channel_list(j2_max)
    npts = unit_points.shape[0]
    basis = np.zeros((npts, 4, 2 * len(channels)), dtype=complex)
    meta = []
    col = 0
    for j2, kappa, mu2 in channels:
        omega = spinor_harmonic(kappa, mu2, unit_points, Y, L) / R
        for block in (0, 1):
            basis[:, 2 * block:2 * block + 2, col] = omega
            meta.append((j2, kappa, mu2, block))
            col += 1
    return basis.reshape(4 * npts, -1), meta


class SpinorTransform:
    """Channel coefficients of 2-spinor fields on a sphere grid, without dense bases.

    Index i runs over (l, mu) with l <= L - 2. For each i the stretched harmonic
    Omega_{-(l+1), mu} is direct and Omega_{l+1, mu} = -(sigma.x) Omega_{-(l+1), mu}.
    Coefficients refer to the unit sphere.
    """

    def __init__(self, sh: SphereHarmonics, unit_points: np.ndarray):
        self.sh = sh
        self.flip_matrix = -sigma_dot(unit_points)
        degrees, mu2s = [], []
        for l in range(sh.L - 1):
            for mu2 in range(-(2 * l + 1), 2 * l + 2, 2):
                degrees.append(l)
                mu2s.append(mu2)
        self.degrees = np.array(degrees)
        self.mu2 = np.array(mu2s)
        mu = self.mu2 / 2.0
        l = self.degrees
        m_lo, m_hi = (self.mu2 - 1) // 2, (self.mu2 + 1) // 2
        self.upper_valid = np.abs(m_lo) <= l
        self.lower_valid = np.abs(m_hi) <= l
        self.upper_index = np.where(self.upper_valid, l * l + l + m_lo, 0)
        self.lower_index = np.where(self.lower_valid, l * l + l + m_hi, 0)
        self.upper_factor = np.where(self.upper_valid, np.sqrt(np.maximum(l + mu + 0.5, 0) / (2 * l + 1)), 0.0)
        self.lower_factor = np.where(self.lower_valid, np.sqrt(np.maximum(l - mu + 0.5, 0) / (2 * l + 1)), 0.0)

    @property
    def size(self) -> int:
        return self.degrees.size

    def flip(self, values: np.ndarray) -> np.ndarray:
        return np.einsum("pab,pb->pa", self.flip_matrix, values)

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """<Omega_{-(l+1), mu}, w> for a 2-spinor field w of shape (N, 2)."""
        c = self.sh.analysis(values)
        return self.upper_factor * c[self.upper_index, 0] + self.lower_factor * c[self.lower_index, 1]

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        """sum_i coefficients[i] Omega_{-(l+1), mu} sampled on the grid; shape (N, 2)."""
        c = np.zeros((self.sh.size, 2), dtype=complex)
        np.add.at(c[:, 0], self.upper_index, self.upper_factor * coefficients)
        np.add.at(c[:, 1], self.lower_index, self.lower_factor * coefficients)
        return self.sh.synthesis(c)

    def channel_coefficients(self, values: np.ndarray):
        """(<Omega_{-(l+1)}, w>, <Omega_{l+1}, w>) for every index."""
        return self.analyze(values), self.analyze(self.flip(values))
