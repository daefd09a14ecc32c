"""Graph charts Sigma = {(y, chi(y))}, their first fundamental form and normals."""
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel

# Configuration
CHART_FD_STEP = 1e-5

ScalarMap = Callable[[np.ndarray], np.ndarray]


class Chart(BaseModel):
    """chi evaluated on points of shape (..., 2); derivatives are analytic when supplied."""

    chi: ScalarMap
    grad: Optional[ScalarMap] = None
    hessian: Optional[ScalarMap] = None
    name: str = "chart"

    class Config:
        arbitrary_types_allowed = True

    def value(self, y) -> np.ndarray:
        return np.asarray(self.chi(np.asarray(y, dtype=float)), dtype=float)

    def gradient(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(y), dtype=float)
        out = np.empty(y.shape[:-1] + (2,))
        for i in range(2):
            step = np.zeros(2)
            step[i] = CHART_FD_STEP
            out[..., i] = (self.value(y + step) - self.value(y - step)) / (2 * CHART_FD_STEP)
        return out

    def second_derivatives(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.hessian is not None:
            return np.asarray(self.hessian(y), dtype=float)
        out = np.empty(y.shape[:-1] + (2, 2))
        for i in range(2):
            step = np.zeros(2)
            step[i] = CHART_FD_STEP
            out[..., i, :] = (self.gradient(y + step) - self.gradient(y - step)) / (2 * CHART_FD_STEP)
        return out

    @classmethod
    def flat(cls) -> "Chart":
        return cls(
            chi=lambda y: np.zeros(np.shape(y)[:-1]),
            grad=lambda y: np.zeros(np.shape(y)),
            hessian=lambda y: np.zeros(np.shape(y)[:-1] + (2, 2)),
            name="flat",
        )

    @classmethod
    def polynomial(cls, coeffs) -> "Chart":
        """chi(y) = sum c[a, b] y1^a y2^b with analytic first and second derivatives."""
        c = np.asarray(coeffs, dtype=float)
        deg1, deg2 = c.shape

        def chi(y):
            y = np.asarray(y, dtype=float)
            return np.polynomial.polynomial.polyval2d(y[..., 0], y[..., 1], c)

        d1 = np.polynomial.polynomial.polyder(c, axis=0)
        d2 = np.polynomial.polynomial.polyder(c, axis=1)
        d11 = np.polynomial.polynomial.polyder(d1, axis=0)
        d12 = np.polynomial.polynomial.polyder(d1, axis=1)
        d22 = np.polynomial.polynomial.polyder(d2, axis=1)

        def grad(y):
            y = np.asarray(y, dtype=float)
            pv = np.polynomial.polynomial.polyval2d
            return np.stack([pv(y[..., 0], y[..., 1], d1), pv(y[..., 0], y[..., 1], d2)], axis=-1)

        def hessian(y):
            y = np.asarray(y, dtype=float)
            pv = np.polynomial.polynomial.polyval2d
            h11 = pv(y[..., 0], y[..., 1], d11)
            h12 = pv(y[..., 0], y[..., 1], d12)
            h22 = pv(y[..., 0], y[..., 1], d22)
            return np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)

        return cls(chi=chi, grad=grad, hessian=hessian, name=f"poly{deg1}x{deg2}")

    @classmethod
    def linear(cls, a1: float, a2: float = 0.0) -> "Chart":
        return cls.polynomial([[0.0, a2], [a1, 0.0]])


class ChartMetric(BaseModel):
    G: np.ndarray
    g: float
    Ginv: np.ndarray
    Q: np.ndarray
    grad_chi: np.ndarray

    class Config:
        arbitrary_types_allowed = True


def as_chart(chi) -> Chart:
    if isinstance(chi, Chart):
        return chi
    return Chart(chi=chi)


def metric_from_gradient(grad_chi) -> ChartMetric:
    d = np.asarray(grad_chi, dtype=float)
    G = np.eye(2) + np.outer(d, d)
    g = 1.0 + float(d @ d)
    Ginv = np.eye(2) - np.outer(d, d) / g
    norm = float(np.hypot(d[0], d[1]))
    if norm == 0.0:
        Q = np.eye(2)
    else:
        s = 1.0 if d[1] >= 0 else -1.0
        rotation = s * np.array([[d[1], d[0]], [-d[0], d[1]]]) / norm
        Q = rotation @ np.diag([1.0, g ** -0.5])
    return ChartMetric(G=G, g=g, Ginv=Ginv, Q=Q, grad_chi=d)


def chart_metric(chi, point) -> ChartMetric:
    chart = as_chart(chi)
    return metric_from_gradient(chart.gradient(np.asarray(point, dtype=float)))


def normal_from_gradient(grad_chi) -> np.ndarray:
    d = np.asarray(grad_chi, dtype=float)
    n = np.concatenate([d, -np.ones(d.shape[:-1] + (1,))], axis=-1)
    return n / np.sqrt(1.0 + np.sum(d * d, axis=-1, keepdims=True))


def chart_normal(chi, point) -> np.ndarray:
    """Pull-back of the outward normal; Omega lies above the graph."""
    chart = as_chart(chi)
    return normal_from_gradient(chart.gradient(np.asarray(point, dtype=float)))


def metric_residual(metric: ChartMetric) -> float:
    """max of |Q^t G Q - I|, |Q Q^t - G^-1|, |det Q - g^-1/2|."""
    Q, G = metric.Q, metric.G
    return max(
        float(np.max(np.abs(Q.T @ G @ Q - np.eye(2)))),
        float(np.max(np.abs(Q @ Q.T - metric.Ginv))),
        abs(float(np.linalg.det(Q)) - metric.g ** -0.5),
    )
