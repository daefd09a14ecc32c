"""Radial reduction of the Dirac equation with constant mass.

Spinors are written psi = (g(r) Omega_{kappa,mu}, i f(r) Omega_{-kappa,mu}); the pair
(g, f) solves

    g' + (1 + kappa) g / r - (E + mass) f = 0
    f' + (1 - kappa) f / r + (E - mass) g = 0.

On a sphere of radius R the trace splits as ((g + f) e_- + (g - f) e_+) / sqrt(2), where
e_+- span the ranges of P_+- in the channel, so the MIT condition reads g(R) + f(R) = 0.
"""
from typing import Tuple

import numpy as np
from scipy.special import spherical_in, spherical_jn, spherical_kn

from .kernels import branch_sqrt
from .shared.errors import ArgumentError


def orbital_degrees(kappa: int) -> Tuple[int, int]:
    """(l, lbar): orbital degrees of the upper and lower components."""
    if kappa == 0:
        raise ArgumentError("kappa must be a non-zero integer")
    if kappa > 0:
        return kappa, kappa - 1
    return -kappa - 1, -kappa


def regular_pair(kappa: int, z: complex, mass: float, r) -> Tuple[np.ndarray, np.ndarray]:
    """Solution regular at the origin for complex energy z."""
    l, lbar = orbital_degrees(kappa)
    k = branch_sqrt(z, mass)
    x = k * np.asarray(r, dtype=float)
    g = spherical_jn(l, x)
    f = np.sign(kappa) * k / (z + mass) * spherical_jn(lbar, x)
    return g, f


def decaying_pair(kappa: int, z: complex, mass: float, r) -> Tuple[np.ndarray, np.ndarray]:
    """Outgoing (decaying for Im k > 0) solution, up to a common constant factor.

    h_l(k r) is proportional to i^{-l} k_l(q r) with q = -i k, which stays finite for
    large masses where j_l and y_l overflow separately.
    """
    l, lbar = orbital_degrees(kappa)
    k = branch_sqrt(z, mass)
    q = -1j * k
    x = q * np.asarray(r, dtype=float)
    g = (1j ** -l) * spherical_kn(l, x)
    f = np.sign(kappa) * k / (z + mass) * (1j ** -lbar) * spherical_kn(lbar, x)
    return g, f


def regular_pair_real(kappa: int, E: float, mass: float, r) -> Tuple[np.ndarray, np.ndarray]:
    """Real-valued regular solution for real E with |E| != mass."""
    l, lbar = orbital_degrees(kappa)
    r = np.asarray(r, dtype=float)
    if abs(E) > mass:
        p = np.sqrt(E * E - mass * mass)
        return spherical_jn(l, p * r), np.sign(kappa) * p / (E + mass) * spherical_jn(lbar, p * r)
    q = np.sqrt(mass * mass - E * E)
    return spherical_in(l, q * r), q / (E + mass) * spherical_in(lbar, q * r)


def decaying_pair_real(kappa: int, E: float, mass: float, r) -> Tuple[np.ndarray, np.ndarray]:
    """Real-valued decaying solution for |E| < mass."""
    l, lbar = orbital_degrees(kappa)
    Q = np.sqrt(mass * mass - E * E)
    r = np.asarray(r, dtype=float)
    return spherical_kn(l, Q * r), -Q / (E + mass) * spherical_kn(lbar, Q * r)


def mit_condition(kappa: int, E: float, m: float, R: float) -> float:
    g, f = regular_pair_real(kappa, E, m, R)
    return float(g + f)


def step_condition(kappa: int, E: float, m: float, outer_mass: float, R: float) -> float:
    """Continuity of the spinor at R: g_in f_out / g_out - f_in (zero at eigenvalues)."""
    g_in, f_in = regular_pair_real(kappa, E, m, R)
    g_out, f_out = decaying_pair_real(kappa, E, outer_mass, R)
    return float(g_in * (f_out / g_out) - f_in)


def interior_ratio(kappa: int, z: complex, mass: float, R: float) -> complex:
    """P_+ / P_- trace ratio (g - f)/(g + f) of the regular solution."""
    g, f = regular_pair(kappa, z, mass, R)
    return complex((g - f) / (g + f))


def exterior_ratio(kappa: int, z: complex, mass: float, R: float) -> complex:
    """P_- / P_+ trace ratio (g + f)/(g - f) of the decaying solution."""
    g, f = decaying_pair(kappa, z, mass, R)
    return complex((g + f) / (g - f))
