"""Semiclassical parametrix of the boundary problem h d_tau u = L0 u + h L1 u, P_- u = f.

The amplitude is A ~ sum_j A_j with

    A_j(y, xi, tau) = exp(tau rho_-(y, xi) / h) sum_{k=0}^{2j} t^k B_{j,k}(y, xi),  t = tau <xi> / h,

A_0 = Pi_- P_- / k_+ exp(tau rho_- / h), and for j >= 1

    h d_tau A_j = L0 A_j - h (L1 A_{j-1} - d_xi L0 . d_y A_{j-1}),   P_- A_j(tau = 0) = 0,

with the growing rho_+ mode removed. Each step is solved in closed form: the forcing is
exponential times a polynomial in t, and its rho_+ component integrates to the
primitives of u^k e^{a u}.
"""
from math import factorial
from typing import Callable, List, Optional

import numpy as np
from pydantic import BaseModel

from ..geometry.charts import Chart, as_chart
from ..shared.errors import CapabilityError
from ..shared.models import Complex
from .eigen import chart_frame, generator_xi_derivatives, l0_eigendecomp

# Configuration
MAX_ORDER = 2
PARAMETRIX_FD_STEP = 1e-5


class SymbolField(BaseModel):
    """Matrix-valued symbol a(y, xi) on a chart, of class S^order."""

    evaluate: Callable
    order: int = 0
    chart: Chart
    y_dependent: bool = True

    class Config:
        arbitrary_types_allowed = True

    def __call__(self, y, xi) -> np.ndarray:
        return np.asarray(self.evaluate(np.asarray(y, dtype=float), np.asarray(xi, dtype=float)))

    def growth_exponent(self, y, xi, scales=(1.0, 10.0, 100.0)) -> float:
        """Fitted exponent of |a(y, t xi)| in t; bounded by the declared order for symbols of S^order."""
        norms = [np.linalg.norm(self(y, t * np.asarray(xi, dtype=float))) for t in scales]
        return float(np.polyfit(np.log(scales), np.log(np.maximum(norms, 1e-300)), 1)[0])

    @classmethod
    def constant(cls, matrix: np.ndarray, chart: Optional[Chart] = None) -> "SymbolField":
        matrix = np.asarray(matrix, dtype=complex)
        return cls(evaluate=lambda y, xi: np.broadcast_to(matrix, np.shape(xi)[:-1] + matrix.shape),
                   order=0, chart=chart or Chart.flat(), y_dependent=False)

    @classmethod
    def from_frequency(cls, symbol: Callable, order: int = 0, chart: Optional[Chart] = None) -> "SymbolField":
        """y-independent symbol given as a function of xi."""
        return cls(evaluate=lambda y, xi: symbol(xi), order=order, chart=chart or Chart.flat(),
                   y_dependent=False)


def _bracket(xi) -> float:
    xi = np.asarray(xi, dtype=float)
    return float(np.sqrt(1.0 + xi @ xi))


def rho_minus(chart: Chart, y, xi) -> complex:
    return l0_eigendecomp(chart, y, xi).rho_minus


def term_coefficients(j: int, chart: Chart, h: float, z: complex, y, xi) -> List[np.ndarray]:
    """[B_{j,0}, ..., B_{j,2j}] at one chart point."""
    if j < 0 or j > MAX_ORDER:
        raise CapabilityError(f"parametrix terms are available for 0 <= j <= {MAX_ORDER}, got {j}")
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    e = l0_eigendecomp(chart, y, xi, z)
    if j == 0:
        return [e.Pi_minus @ e.P_minus / e.k_plus]
    forcing = forcing_coefficients(j - 1, chart, h, z, y, xi)
    return solve_step(forcing, e, h, _bracket(xi))


def forcing_coefficients(j: int, chart: Chart, h: float, z: complex, y, xi) -> List[np.ndarray]:
    """C_k with -h (L1 A_j - d_xi L0 . d_y A_j)(s) = exp(s rho_- / h) sum_k t_s^k C_k."""
    e = l0_eigendecomp(chart, y, xi, z)
    bracket = _bracket(xi)
    B = term_coefficients(j, chart, h, z, y, xi)
    dB, drho = [], []
    for i in range(2):
        step = np.zeros(2)
        step[i] = PARAMETRIX_FD_STEP
        forward = term_coefficients(j, chart, h, z, y + step, xi)
        backward = term_coefficients(j, chart, h, z, y - step, xi)
        dB.append([(f - b) / (2 * PARAMETRIX_FD_STEP) for f, b in zip(forward, backward)])
        drho.append((rho_minus(chart, y + step, xi) - rho_minus(chart, y - step, xi))
                    / (2 * PARAMETRIX_FD_STEP))
    dL0 = generator_xi_derivatives(e.normal, e.g)
    C = []
    for k in range(len(B) + 1):
        term = e.L1 @ B[k] if k < len(B) else np.zeros((4, 4), dtype=complex)
        for i in range(2):
            # d_y of t^k B_k exp(s rho_-/h) brings t^(k+1) (d_y rho_- / <xi>) B_k
            inner = dB[i][k] if k < len(B) else 0.0
            if k >= 1:
                inner = inner + (drho[i] / bracket) * B[k - 1]
            term = term - dL0[i] @ inner
        C.append(-h * term)
    return C


def solve_step(C: List[np.ndarray], e, h: float, bracket: float) -> List[np.ndarray]:
    """B_{j,p} of the decaying solution of h d_tau A = L0 A + exp(s rho_-/h) sum_k t^k C_k."""
    K = len(C) - 1
    delta = e.rho_minus - e.rho_plus
    plus = [e.Pi_plus @ c for c in C]
    minus = [e.Pi_minus @ c for c in C]
    # the rho_+ mode grows unless Pi_+ A(0) cancels its initial value
    growth = sum(((-1) ** k) * factorial(k) * bracket ** k / delta ** (k + 1) * plus[k] for k in range(K + 1))
    initial = (e.P_plus / e.k_plus) @ growth
    B = [initial]
    for p in range(1, K + 2):
        value = minus[p - 1] / (p * bracket)
        for k in range(p, K + 1):
            value = value + ((-1) ** (k - p)) * (factorial(k) / factorial(p)) * bracket ** (k - p) \
                / delta ** (k - p + 1) * plus[k]
        B.append(value)
    return B


class ParametrixTerm(BaseModel):
    j: int
    h: float
    z: Complex = 0j
    chart: Chart

    class Config:
        arbitrary_types_allowed = True

    @property
    def B(self) -> List[SymbolField]:
        return [SymbolField(evaluate=(lambda y, xi, k=k: self.coefficients(y, xi)[k]), order=-self.j,
                            chart=self.chart) for k in range(2 * self.j + 1)]

    @property
    def rho_minus(self) -> SymbolField:
        return SymbolField(evaluate=lambda y, xi: np.asarray(rho_minus(self.chart, y, xi)), order=1,
                           chart=self.chart)

    def coefficients(self, y, xi) -> List[np.ndarray]:
        return term_coefficients(self.j, self.chart, self.h, self.z, y, xi)

    def evaluate(self, y, xi, tau: float) -> np.ndarray:
        rho = rho_minus(self.chart, y, xi)
        t = tau * _bracket(xi) / self.h
        return np.exp(tau * rho / self.h) * sum(t ** k * b for k, b in enumerate(self.coefficients(y, xi)))

    def tau_derivative(self, y, xi, tau: float) -> np.ndarray:
        """d_tau A_j from the stored exponential-polynomial form."""
        rho = rho_minus(self.chart, y, xi)
        bracket = _bracket(xi)
        t = tau * bracket / self.h
        B = self.coefficients(y, xi)
        value = sum(t ** k * b for k, b in enumerate(B)) * (rho / self.h)
        value = value + sum(k * t ** (k - 1) * b for k, b in enumerate(B) if k) * (bracket / self.h)
        return np.exp(tau * rho / self.h) * value


def parametrix_term(j: int, chart: Chart, h: float, z: complex = 0.0) -> ParametrixTerm:
    if j < 0 or j > MAX_ORDER:
        raise CapabilityError(f"parametrix terms are available for 0 <= j <= {MAX_ORDER}, got {j}")
    return ParametrixTerm(j=j, h=h, z=complex(z), chart=as_chart(chart))


def transport_residual(term: ParametrixTerm, y, xi, tau: float) -> float:
    """|h d_tau A_j - L0 A_j + h (L1 A_{j-1} - d_xi L0 . d_y A_{j-1})| relative to |A_j| + |L0 A_j|.

    d_y A_{j-1} is taken from the full amplitude by central differences, independently
    of the coefficient route used to build A_j.
    """
    y = np.asarray(y, dtype=float)
    e = l0_eigendecomp(term.chart, y, xi, term.z)
    A = term.evaluate(y, xi, tau)
    residual = term.h * term.tau_derivative(y, xi, tau) - e.L0 @ A
    if term.j > 0:
        previous = parametrix_term(term.j - 1, term.chart, term.h, term.z)
        dL0 = generator_xi_derivatives(*chart_frame(term.chart, y))
        source = e.L1 @ previous.evaluate(y, xi, tau)
        for i in range(2):
            step = np.zeros(2)
            step[i] = PARAMETRIX_FD_STEP
            dA = (previous.evaluate(y + step, xi, tau) - previous.evaluate(y - step, xi, tau)) \
                / (2 * PARAMETRIX_FD_STEP)
            source = source - dL0[i] @ dA
        residual = residual + term.h * source
    scale = np.max(np.abs(A)) + np.max(np.abs(e.L0 @ A))
    return float(np.max(np.abs(residual)) / scale) if scale > 0 else float(np.max(np.abs(residual)))


def boundary_residual(term: ParametrixTerm, y, xi) -> float:
    """|P_- A_j(tau = 0) - delta_j0 P_-|."""
    e = l0_eigendecomp(term.chart, y, xi, term.z)
    target = e.P_minus if term.j == 0 else 0.0
    return float(np.max(np.abs(e.P_minus @ term.evaluate(y, xi, 0.0) - target)))
