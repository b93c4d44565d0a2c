"""
Fields on the six faces of the cube Omega.

Face i = 2*axis + (side > 0) with outward normal N = side * e_axis. Tangential
fields are stored in the face frame t1 = e_(axis+1), t2 = e_(axis+2) (indices
mod 3), so N.w = 0 holds by construction. Face samples are the closure nodes,
(2m+1) x (2m+1) per face, with array axes in increasing coordinate order.
"""

from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from src.grid.grid import Grid3
from src.utils.exceptions import GridMismatch

TANGENTIAL = "tangential"
SCALAR = "boundary_scalar"
FACES = tuple((axis, side) for axis in range(3) for side in (-1, 1))


def face_number(axis: int, side: int) -> int:
    return 2 * axis + (1 if side > 0 else 0)


def tangent_axes(axis: int) -> Tuple[int, int]:
    return (axis + 1) % 3, (axis + 2) % 3


def array_axis(axis: int, direction: int) -> int:
    """Position of a coordinate direction among the two face array axes."""
    others = [j for j in range(3) if j != axis]
    return others.index(direction)


@dataclass
class BoundaryField:
    grid: Grid3
    data: np.ndarray
    kind: str = TANGENTIAL

    def __post_init__(self):
        comps = 2 if self.kind == TANGENTIAL else 1
        side = 2 * self.grid.m + 1
        if self.kind not in (TANGENTIAL, SCALAR):
            raise ValueError(f"Unknown boundary field kind: {self.kind}")
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.shape != (6, comps, side, side):
            raise ValueError(
                f"{self.kind} boundary field needs shape {(6, comps, side, side)}, got {self.data.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid3, kind: str = TANGENTIAL) -> "BoundaryField":
        comps = 2 if kind == TANGENTIAL else 1
        side = 2 * grid.m + 1
        return cls(grid, np.zeros((6, comps, side, side), dtype=np.complex128), kind)

    def faces(self) -> Iterator[Tuple[int, int, np.ndarray]]:
        for axis, side in FACES:
            yield axis, side, self.data[face_number(axis, side)]

    def _check(self, other: "BoundaryField"):
        if self.grid != other.grid or self.kind != other.kind:
            raise GridMismatch("Boundary fields differ in grid or kind")

    def __add__(self, other: "BoundaryField") -> "BoundaryField":
        self._check(other)
        return BoundaryField(self.grid, self.data + other.data, self.kind)

    def __sub__(self, other: "BoundaryField") -> "BoundaryField":
        self._check(other)
        return BoundaryField(self.grid, self.data - other.data, self.kind)

    def scaled(self, factor) -> "BoundaryField":
        """Multiply by a constant or by a scalar boundary array (6, 1, s, s)."""
        return BoundaryField(self.grid, self.data * factor, self.kind)


def closure_values(u: np.ndarray, grid: Grid3) -> np.ndarray:
    """Restrict (..., n, n, n) node values to the closed cube (..., s, s, s)."""
    s = 2 * grid.m + 1
    if u.shape[-3:] == (s, s, s):
        return u
    if u.shape[-3:] != grid.shape:
        raise GridMismatch(f"Field shape {u.shape} fits neither the grid nor the cube")
    return u[(Ellipsis,) + grid.closure_index]


def _face_slice(axis: int, side: int, s: int):
    idx = [slice(None)] * 3
    idx[axis] = 0 if side < 0 else s - 1
    return (Ellipsis,) + tuple(idx)


def face_values(u: np.ndarray, grid: Grid3, axis: int, side: int) -> np.ndarray:
    """Samples of a (..., n, n, n) or closure field on one face."""
    u = closure_values(u, grid)
    return u[_face_slice(axis, side, u.shape[-1])]


def tangential_trace(u: np.ndarray, grid: Grid3) -> BoundaryField:
    """N x u in face-frame components sigma * (-u_t2, u_t1)."""
    out = BoundaryField.zeros(grid, TANGENTIAL)
    for axis, side in FACES:
        t1, t2 = tangent_axes(axis)
        vals = face_values(u, grid, axis, side)
        i = face_number(axis, side)
        out.data[i, 0] = -side * vals[t2]
        out.data[i, 1] = side * vals[t1]
    return out


def tangential_components(u: np.ndarray, grid: Grid3) -> BoundaryField:
    """The tangential part of u itself, (u_t1, u_t2) per face."""
    out = BoundaryField.zeros(grid, TANGENTIAL)
    for axis, side in FACES:
        t1, t2 = tangent_axes(axis)
        vals = face_values(u, grid, axis, side)
        i = face_number(axis, side)
        out.data[i, 0] = vals[t1]
        out.data[i, 1] = vals[t2]
    return out


def normal_trace(u: np.ndarray, grid: Grid3) -> BoundaryField:
    """N . u on every face."""
    out = BoundaryField.zeros(grid, SCALAR)
    for axis, side in FACES:
        out.data[face_number(axis, side), 0] = side * face_values(u, grid, axis, side)[axis]
    return out


def scalar_trace(f: np.ndarray, grid: Grid3) -> BoundaryField:
    out = BoundaryField.zeros(grid, SCALAR)
    for axis, side in FACES:
        out.data[face_number(axis, side), 0] = face_values(f, grid, axis, side)
    return out


def surface_divergence(w: BoundaryField) -> BoundaryField:
    """Per-face 2-D divergence of a tangential field (second-order one-sided at edges)."""
    if w.kind != TANGENTIAL:
        raise ValueError("surface_divergence needs a tangential field")
    h = w.grid.h
    out = BoundaryField.zeros(w.grid, SCALAR)
    for axis, side, values in w.faces():
        t1, t2 = tangent_axes(axis)
        div = (np.gradient(values[0], h, axis=array_axis(axis, t1), edge_order=2)
               + np.gradient(values[1], h, axis=array_axis(axis, t2), edge_order=2))
        out.data[face_number(axis, side), 0] = div
    return out


def closure_curl(u: np.ndarray, grid: Grid3) -> np.ndarray:
    """Curl of a closure-cube vector field by second-order differences."""
    u = closure_values(u, grid)
    d = lambda comp, ax: np.gradient(u[comp], grid.h, axis=ax, edge_order=2)
    return np.array([
        d(2, 1) - d(1, 2),
        d(0, 2) - d(2, 0),
        d(1, 0) - d(0, 1),
    ])


def curl_normal_trace(u: np.ndarray, grid: Grid3) -> BoundaryField:
    """-N . (curl u) on the faces, equal to Div(N x u)."""
    out = normal_trace(closure_curl(u, grid), grid)
    return out.scaled(-1.0)


def face_lipschitz_product(f_trace: BoundaryField, w: BoundaryField) -> BoundaryField:
    """Pointwise product of a scalar boundary field with a tangential one."""
    if f_trace.kind != SCALAR:
        raise ValueError("First factor must be a scalar boundary field")
    return BoundaryField(w.grid, w.data * f_trace.data, w.kind)
