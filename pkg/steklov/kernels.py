"""Fundamental solution of D_m - z, its singular split, and scalar Yukawa/Helmholtz kernels.

Branch convention: k = sqrt(z^2 - m^2) with Im k >= 0; on the cut (z real, |z| > m)
the positive real root is taken, i.e. the limit from the upper half plane.
"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, field_validator
from scipy.special import erfcx

from .clifford import ALPHA, BETA, I4
from .shared.errors import ArgumentError, DomainError

# Configuration
DIRAC_FD_STEP = 1e-4
FOUR_PI = 4.0 * np.pi


def branch_sqrt(z: complex, m: float) -> complex:
    k = np.sqrt(complex(z) ** 2 - m * m + 0j)
    if k.imag < 0 or (k.imag == 0 and k.real < 0):
        k = -k
    return complex(k)


class KernelParams(BaseModel):
    m: float
    z: complex

    class Config:
        arbitrary_types_allowed = True

    @field_validator("z", mode="before")
    @classmethod
    def coerce_complex(cls, v):
        if isinstance(v, (tuple, list)):
            return complex(v[0], v[1])
        return complex(v)

    @field_validator("m")
    @classmethod
    def positive_mass(cls, v):
        if v <= 0:
            raise ArgumentError(f"mass must be positive, got {v}")
        return v

    @property
    def k(self) -> complex:
        return branch_sqrt(self.z, self.m)

    @property
    def kappa(self) -> complex:
        """Yukawa rate -ik, Re kappa >= 0."""
        return -1j * self.k

    def with_mass(self, mass: float) -> "KernelParams":
        return KernelParams(m=mass, z=self.z)

    def with_z(self, z: complex) -> "KernelParams":
        return KernelParams(m=self.m, z=z)


def _radius(x: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise DomainError("kernel evaluated at x = 0")
    return r


def assemble_blocks(scalar, beta_coeff, alpha_coeff) -> np.ndarray:
    """scalar I + beta_coeff beta + sum_j alpha_coeff[..., j] alpha_j."""
    scalar = np.asarray(scalar)
    out = scalar[..., None, None] * I4 + np.asarray(beta_coeff)[..., None, None] * BETA
    return out + np.einsum("...j,jab->...ab", alpha_coeff, ALPHA)


def phi_coefficients(x: np.ndarray, p: KernelParams):
    """(scalar, beta, alpha-vector) coefficients of phi^z_m(x)."""
    x = np.asarray(x, dtype=float)
    r = _radius(x)
    k = p.k
    g = np.exp(1j * k * r) / (FOUR_PI * r)
    scalar = g * p.z
    beta = g * p.m
    alpha = (g * (1.0 - 1j * k * r) * 1j / r ** 2)[..., None] * x
    return scalar, beta, alpha


def phi_z(x, p: KernelParams) -> np.ndarray:
    return assemble_blocks(*phi_coefficients(x, p))


def kernel_split_coefficients(x: np.ndarray, p: KernelParams):
    x = np.asarray(x, dtype=float)
    r = _radius(x)
    k = p.k
    e = np.exp(1j * k * r)
    scalar = e * p.z / (FOUR_PI * r)
    beta = e * p.m / (FOUR_PI * r)
    smooth = e * k / (FOUR_PI * r ** 2) + 1j * np.expm1(1j * k * r) / (FOUR_PI * r ** 3)
    w = 1j / (FOUR_PI * r ** 3)
    return (scalar, beta, smooth[..., None] * x), w[..., None] * x


def kernel_split(x, p: KernelParams) -> Tuple[np.ndarray, np.ndarray]:
    """phi = k_part + w_part with w_part = i alpha.x / (4 pi |x|^3)."""
    (scalar, beta, alpha), w_alpha = kernel_split_coefficients(x, p)
    zero = np.zeros_like(scalar)
    return assemble_blocks(scalar, beta, alpha), assemble_blocks(zero, zero, w_alpha)


def single_layer_kernel(x, p: KernelParams):
    x = np.asarray(x, dtype=float)
    r = _radius(x)
    value = np.exp(1j * p.k * r) / (FOUR_PI * r)
    return value if np.ndim(value) else complex(value)


def dirac_apply_fd(field, x: np.ndarray, p: KernelParams, mass: float = None, step: float = DIRAC_FD_STEP):
    """(-i alpha.grad + mass beta - z) applied to field(x) by central differences."""
    mass = p.m if mass is None else mass
    x = np.asarray(x, dtype=float)
    value = field(x)
    out = _apply_matrix(mass * BETA - p.z * I4, value)
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        derivative = (field(x + e) - field(x - e)) / (2 * step)
        out = out - 1j * _apply_matrix(ALPHA[j], derivative)
    return out, value


def _apply_matrix(matrix: np.ndarray, value: np.ndarray) -> np.ndarray:
    """Left-multiply spinor values of shape (..., 4) or matrix values of shape (..., 4, 4)."""
    if value.shape[-2:] == (4, 4):
        return matrix @ value
    return value @ matrix.T


def dirac_residual(p: KernelParams, points: np.ndarray, step: float = DIRAC_FD_STEP) -> float:
    """max relative residual of (D_m - z) phi at the points."""
    applied, value = dirac_apply_fd(lambda y: phi_z(y, p), points, p, step=step)
    scale = np.max(np.abs(value), axis=(-2, -1))
    return float(np.max(np.max(np.abs(applied), axis=(-2, -1)) / scale))


def adjoint_symmetry_residual(x: np.ndarray, z: complex, m: float) -> float:
    """max |phi^z(-x)^* - phi^{conj z}(x)| relative to |phi|."""
    p, pbar = KernelParams(m=m, z=z), KernelParams(m=m, z=np.conj(z))
    lhs = np.conj(np.swapaxes(phi_z(-x, p), -1, -2))
    rhs = phi_z(x, pbar)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))


# Scalar volume potentials with Yukawa rate kappa (Re kappa > 0)
def yukawa_gaussian(r, kappa: complex, width: float) -> Tuple[np.ndarray, np.ndarray]:
    """u = G_kappa * exp(-|y|^2 / (2 width^2)) and du/dr at radius r.

    G_kappa(x) = exp(-kappa |x|) / (4 pi |x|); solves (-Delta + kappa^2) u = Gaussian.
    """
    r = np.asarray(r, dtype=float)
    s = float(width)
    kappa = complex(kappa)
    gauss = np.exp(-r ** 2 / (2 * s * s))
    root2s = np.sqrt(2.0) * s
    b_plus = (kappa * s * s + r) / root2s
    b_minus = (kappa * s * s - r) / root2s
    e_plus = erfcx(b_plus) * gauss
    # erfcx is stable for Re b >= 0; reflect otherwise
    reflected = b_minus.real < 0
    e_minus = np.empty(np.shape(r), dtype=complex)
    e_minus[~reflected] = erfcx(b_minus[~reflected]) * gauss[~reflected]
    rr = r[reflected]
    e_minus[reflected] = (2.0 * np.exp(-kappa * rr + kappa * kappa * s * s / 2.0)
                          - erfcx(-b_minus[reflected]) * gauss[reflected])
    prefactor = 0.5 * s ** 3 * np.sqrt(np.pi / 2.0)
    w = prefactor * (e_minus - e_plus)
    dw = -kappa * prefactor * (e_minus + e_plus) + s * s * gauss
    small = r < 1e-8 * s
    safe_r = np.where(small, 1.0, r)
    u = np.where(small, dw, w / safe_r)
    du = np.where(small, 0.0, (dw - u) / safe_r)
    return u, du


def yukawa_ball(rho, kappa: complex, R: float) -> Tuple[np.ndarray, np.ndarray]:
    """V = G_kappa * 1_{|y|<R} and dV/drho at radius rho."""
    rho = np.asarray(rho, dtype=float)
    kappa = complex(kappa)
    inside = rho < R
    safe = np.where(rho == 0, 1.0, rho)
    # interior: 1/kappa^2 - (1 + kappa R) e^{-kappa R} sinh(kappa rho) / (kappa^3 rho)
    decay_sinh = 0.5 * (np.exp(kappa * (safe - R)) - np.exp(-kappa * (safe + R)))
    decay_cosh = 0.5 * (np.exp(kappa * (safe - R)) + np.exp(-kappa * (safe + R)))
    A = (1.0 + kappa * R) / kappa ** 3
    v_in = 1.0 / kappa ** 2 - A * decay_sinh / safe
    dv_in = -A * (kappa * safe * decay_cosh - decay_sinh) / safe ** 2
    v_center = 1.0 / kappa ** 2 - (1.0 + kappa * R) * np.exp(-kappa * R) / kappa ** 2
    v_in = np.where(rho == 0, v_center, v_in)
    dv_in = np.where(rho == 0, 0.0, dv_in)
    # exterior: (kappa R cosh(kappa R) - sinh(kappa R)) e^{-kappa rho} / (kappa^3 rho)
    ep = np.exp(kappa * (R - safe))
    em = np.exp(-kappa * (R + safe))
    coeff = (kappa * R * 0.5 * (ep + em) - 0.5 * (ep - em)) / kappa ** 3
    v_out = coeff / safe
    dv_out = -coeff * (kappa * safe + 1.0) / safe ** 2
    return np.where(inside, v_in, v_out), np.where(inside, dv_in, dv_out)
