"""Binary dump of boundary operators.

Layout (little-endian): magic b"SDOP1", uint64 N, 16-byte ASCII label, float64 m,
float64 Re z, float64 Im z, then the (4N)x(4N) matrix as row-major complex128.
"""
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..geometry import SurfaceMesh
from ..shared.errors import MeshLoadError
from ..shared.models import OperatorLabel
from .operators import BoundaryOperator

MAGIC = b"SDOP1"
HEADER = struct.Struct("<5sQ16sddd")


def dump_operator(op: BoundaryOperator, path: Union[str, Path]):
    n = op.mesh.size
    header = HEADER.pack(MAGIC, n, op.label.value.encode("ascii"), op.m, op.z.real, op.z.imag)
    with open(path, "wb") as handle:
        handle.write(header)
        handle.write(np.ascontiguousarray(op.matrix, dtype="<c16").tobytes())


def load_operator(path: Union[str, Path], mesh: SurfaceMesh) -> BoundaryOperator:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise MeshLoadError(f"{path}: truncated operator header")
    magic, n, label, m, z_re, z_im = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MeshLoadError(f"{path}: bad magic {magic!r}")
    if n != mesh.size:
        raise MeshLoadError(f"{path}: operator has N={n}, mesh has {mesh.size} nodes")
    body = np.frombuffer(data, dtype="<c16", offset=HEADER.size)
    if body.size != (4 * n) ** 2:
        raise MeshLoadError(f"{path}: expected {(4 * n) ** 2} entries, found {body.size}")
    return BoundaryOperator(
        matrix=body.reshape(4 * n, 4 * n).astype(complex),
        mesh=mesh,
        label=OperatorLabel(label.rstrip(b"\0").decode("ascii")),
        m=m,
        z=complex(z_re, z_im),
    )
