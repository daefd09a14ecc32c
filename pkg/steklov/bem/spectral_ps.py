"""Exact Poincare-Steklov operators on a round sphere.

In the channel (kappa, mu) the P_- and P_+ ranges are spanned by
e_-+ = (Omega_kappa, +-i Omega_-kappa)/sqrt(2); the interior operator maps e_- to
r_kappa e_+ with r_kappa = (g - f)/(g + f) for the regular radial solution, the exterior
one maps e_+ to (g + f)/(g - f) e_- for the decaying solution.
"""
from functools import lru_cache
from typing import Union

import numpy as np
from pydantic import BaseModel

from ..geometry import SurfaceMesh, TraceField
from ..geometry.harmonics import SpinorTransform
from ..radial import exterior_ratio, interior_ratio
from ..shared.errors import CapabilityError
from ..shared.models import Complex, OperatorLabel, Side
from .operators import BoundaryOperator

SQRT2 = np.sqrt(2.0)


def _ratio(side: Side, kappa: int, mass: float, z: complex, R: float) -> complex:
    if side == Side.INTERIOR:
        return interior_ratio(kappa, z, mass, R)
    return exterior_ratio(kappa, z, mass, R)


def channel_vectors(mesh: SurfaceMesh, max_j2: int = None):
    """(e_minus, e_plus, kappas): weighted-orthonormal channel columns of the resolved space."""
    basis, meta = mesh.resolved_space()
    column = {entry: i for i, entry in enumerate(meta)}
    minus, plus, kappas = [], [], []
    for (j2, kappa, mu2, block), i in column.items():
        if block != 0 or (max_j2 is not None and j2 > max_j2):
            continue
        upper = basis[:, i]
        lower = basis[:, column[(j2, -kappa, mu2, 1)]]
        minus.append((upper + 1j * lower) / SQRT2)
        plus.append((upper - 1j * lower) / SQRT2)
        kappas.append(kappa)
    return np.array(minus).T, np.array(plus).T, np.array(kappas)


def spectral_ps(mesh: SurfaceMesh, mass: float, z: complex, side: Union[Side, str] = Side.INTERIOR) -> BoundaryOperator:
    """Dense exact PS operator on the resolved space of a sphere mesh."""
    if not mesh.is_sphere:
        raise CapabilityError("exact Poincare-Steklov operators need a sphere mesh")
    side = Side(side)
    minus, plus, kappas = channel_vectors(mesh)
    ratios = np.array([_ratio(side, int(k), mass, z, mesh.R) for k in kappas])
    source, target = (minus, plus) if side == Side.INTERIOR else (plus, minus)
    matrix = (target * ratios[None, :]) @ (np.conj(source).T * mesh.spinor_weights[None, :])
    label = OperatorLabel.PS_INTERIOR if side == Side.INTERIOR else OperatorLabel.PS_EXTERIOR
    return BoundaryOperator(matrix=matrix, mesh=mesh, label=label, m=mass, z=complex(z))


@lru_cache(maxsize=64)
def _ratio_table(side: Side, L: int, mass: float, z: complex, R: float):
    degrees = np.arange(L - 1)
    negative = np.array([_ratio(side, -(l + 1), mass, z, R) for l in degrees])
    positive = np.array([_ratio(side, l + 1, mass, z, R) for l in degrees])
    return negative, positive


class SpectralPoincareSteklov(BaseModel):
    """Matrix-free exact PS operator; apply() costs a few spherical harmonic transforms."""

    mesh: SurfaceMesh
    mass: float
    z: Complex
    side: Side = Side.INTERIOR

    class Config:
        arbitrary_types_allowed = True

    @property
    def label(self) -> OperatorLabel:
        return OperatorLabel.PS_INTERIOR if self.side == Side.INTERIOR else OperatorLabel.PS_EXTERIOR

    def transform(self) -> SpinorTransform:
        return self.mesh.cached("spinor_transform",
                                lambda: SpinorTransform(self.mesh.harmonics(), self.mesh.normals))

    def apply(self, field: Union[TraceField, np.ndarray]) -> TraceField:
        if not self.mesh.is_sphere:
            raise CapabilityError("exact Poincare-Steklov operators need a sphere mesh")
        values = field.values if isinstance(field, TraceField) else np.asarray(field).reshape(-1, 4)
        st = self.transform()
        negative, positive = _ratio_table(self.side, st.sh.L, self.mass, complex(self.z), self.mesh.R)
        ratio_neg = negative[st.degrees]
        ratio_pos = positive[st.degrees]
        # source channel uses +i (interior, e_-) or -i (exterior, e_+) on the lower block
        s = 1.0 if self.side == Side.INTERIOR else -1.0
        up_neg, up_pos = st.channel_coefficients(values[:, :2])
        low_neg, low_pos = st.channel_coefficients(values[:, 2:])
        c_neg = (up_neg - s * 1j * low_pos) / SQRT2
        c_pos = (up_pos - s * 1j * low_neg) / SQRT2
        d_neg, d_pos = ratio_neg * c_neg, ratio_pos * c_pos
        direct_neg, direct_pos = st.synthesize(d_neg), st.synthesize(d_pos)
        upper = (direct_neg + st.flip(direct_pos)) / SQRT2
        lower = -s * 1j * (st.flip(direct_neg) + direct_pos) / SQRT2
        return self.mesh.field(np.concatenate([upper, lower], axis=1))
