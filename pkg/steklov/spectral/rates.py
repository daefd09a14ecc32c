"""Large-mass rate studies: log-log fits and the first-order eigenvalue expansion."""
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from sklearn.linear_model import LinearRegression

from ..bem import ps_exterior, sobolev_operator_norm, spectral_ps
from ..clifford import BETA
from ..geometry import SurfaceMesh, TraceField
from ..shared.errors import ArgumentError, CapabilityError
from ..shared.models import RateFit, Side
from ..symbols import surface_spin_operator
from .oracle import radial_oracle

logger = logging.getLogger(__name__)

# Configuration
MIN_RATE_POINTS = 3
PS_SOURCE_ORDER = 1.0


def rate_fit(pairs: Iterable[Tuple[float, float]]) -> RateFit:
    """Least-squares fit of log residual against log M."""
    pairs = list(pairs)
    if len(pairs) < MIN_RATE_POINTS:
        raise ArgumentError(f"a rate fit needs at least {MIN_RATE_POINTS} points, got {len(pairs)}")
    M = np.array([p[0] for p in pairs], dtype=float)
    residual = np.array([p[1] for p in pairs], dtype=float)
    if np.any(M <= 0) or np.any(residual <= 0):
        raise ArgumentError("rate fits need positive couplings and residuals")
    x, y = np.log(M)[:, None], np.log(residual)
    model = LinearRegression().fit(x, y)
    fit = RateFit(slope=float(model.coef_[0]), intercept=float(model.intercept_), r2=float(model.score(x, y)))
    logger.debug("rate fit over %d points: slope %.4f (r2 %.4f)", len(pairs), fit.slope, fit.r2)
    return fit


class MkjResult(BaseModel):
    matrix: np.ndarray
    mu: np.ndarray
    principal: np.ndarray
    energy: np.ndarray

    class Config:
        arbitrary_types_allowed = True


def mkj_matrix(mesh: SurfaceMesh, m: float, eigentraces: Sequence[TraceField], eigenvalue: Optional[float] = None,
               include_energy_term: bool = True) -> MkjResult:
    """m_kj = 1/2 <(beta Op(S.(xi ^ n)) - lambda) G_+ f_k, G_+ f_j> and its eigenvalues mu.

    The energy term -lambda/2 <G_+ f_k, G_+ f_j> enters at the same order 1/M as the
    principal term and is dropped with include_energy_term=False.
    """
    if not mesh.is_sphere:
        raise CapabilityError("m_kj quantizes S.(xi ^ n) spectrally and needs a sphere mesh")
    if m <= 0:
        raise ArgumentError(f"mass must be positive, got {m}")
    if not eigentraces:
        raise ArgumentError("m_kj needs at least one eigentrace")
    if include_energy_term and eigenvalue is None:
        raise ArgumentError("the energy term needs the MIT eigenvalue")
    traces = [t if isinstance(t, TraceField) else mesh.field(t) for t in eigentraces]
    applied = [mesh.field(surface_spin_operator(mesh, t.values) @ BETA.T) for t in traces]
    n = len(traces)
    principal = np.array([[0.5 * applied[k].inner(traces[j]) for j in range(n)] for k in range(n)])
    gram = np.array([[traces[k].inner(traces[j]) for j in range(n)] for k in range(n)])
    energy = -0.5 * eigenvalue * gram if include_energy_term else np.zeros_like(gram)
    matrix = principal + energy
    mu = np.linalg.eigvals(matrix)
    order = np.argsort(mu.real)
    logger.debug("m_kj eigenvalues %s", mu[order])
    return MkjResult(matrix=matrix, mu=mu[order], principal=principal, energy=energy)


def expansion_slopes(R: float, m: float, couplings: Sequence[float], kappa: int = -1) -> List[Tuple[float, float, float]]:
    """(M, lambda^M, M (lambda^M - lambda_MIT)) for the lowest oracle eigenvalue of channel kappa."""
    mit = radial_oracle(R, m, None, kappa, count=1)
    if not mit:
        raise ArgumentError(f"no MIT eigenvalue in channel {kappa}")
    rows = []
    for M in couplings:
        step = radial_oracle(R, m, M, kappa, count=1)
        if not step:
            raise ArgumentError(f"no step-mass eigenvalue in channel {kappa} for M={M}")
        rows.append((float(M), step[0], float(M) * (step[0] - mit[0])))
    return rows


def exterior_ps_norm(mesh: SurfaceMesh, m: float, M: float, z: complex = 0.0, exact: bool = False,
                     threads: Optional[int] = None) -> float:
    """||A^e_{m+M}|| from P_+ H^1 to P_- L^2, which decays like 1/M."""
    if M <= 0:
        raise ArgumentError(f"coupling M must be positive, got {M}")
    if exact:
        op = spectral_ps(mesh, m + M, z, Side.EXTERIOR)
    else:
        op = ps_exterior(mesh, m + M, z, threads)
    return sobolev_operator_norm(op, PS_SOURCE_ORDER)
