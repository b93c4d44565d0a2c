"""
The 8-component state Y = (f1, u1, f2, u2) and the inner products on Omega.
"""

from dataclasses import dataclass

import numpy as np

from src.grid.grid import Grid3
from src.utils.exceptions import GridMismatch

# Component layout of the 8-vector: f1 | u1 (3) | f2 | u2 (3)
F1 = 0
U1 = slice(1, 4)
F2 = 4
U2 = slice(5, 8)
U1_IDX = (1, 2, 3)
U2_IDX = (5, 6, 7)


@dataclass(frozen=True, eq=False)
class StateY:
    """Complex samples of (h, H, e, E)-type 8-vectors on a grid."""
    grid: Grid3
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != (8,) + self.grid.shape:
            raise ValueError(
                f"StateY needs shape {(8,) + self.grid.shape}, got {self.data.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid3) -> "StateY":
        return cls(grid, np.zeros((8,) + grid.shape, dtype=np.complex128))

    @classmethod
    def constant(cls, grid: Grid3, vector) -> "StateY":
        v = np.asarray(vector, dtype=np.complex128).reshape(8, 1, 1, 1)
        return cls(grid, np.broadcast_to(v, (8,) + grid.shape).copy())

    @classmethod
    def from_parts(cls, grid: Grid3, f1, u1, f2, u2) -> "StateY":
        data = np.empty((8,) + grid.shape, dtype=np.complex128)
        data[F1], data[U1], data[F2], data[U2] = f1, u1, f2, u2
        return cls(grid, data)

    @property
    def f1(self) -> np.ndarray:
        return self.data[F1]

    @property
    def u1(self) -> np.ndarray:
        return self.data[U1]

    @property
    def f2(self) -> np.ndarray:
        return self.data[F2]

    @property
    def u2(self) -> np.ndarray:
        return self.data[U2]

    def _other(self, other: "StateY") -> np.ndarray:
        if self.grid != other.grid:
            raise GridMismatch("StateY operands live on different grids")
        return other.data

    def __add__(self, other: "StateY") -> "StateY":
        return StateY(self.grid, self.data + self._other(other))

    def __sub__(self, other: "StateY") -> "StateY":
        return StateY(self.grid, self.data - self._other(other))

    def scale(self, factor) -> "StateY":
        """Multiply by a scalar or a scalar field."""
        return StateY(self.grid, self.data * factor)

    def conj(self) -> "StateY":
        return StateY(self.grid, np.conj(self.data))


def _omega_weights(grid: Grid3, quadrature: str) -> np.ndarray:
    if quadrature == "mask":
        return grid.omega_mask * grid.cell_volume
    if quadrature == "trapezoid":
        return grid.trapezoid_weights
    raise ValueError(f"Unknown quadrature: {quadrature}")


def inner_omega(Y: StateY, Z: StateY, quadrature: str = "mask") -> complex:
    """
    <Y, Z>_Omega = sum_j int f^j conj(g^j) + u^j . conj(v^j).

    The default quadrature counts the Omega-mask nodes with weight h^3;
    ``quadrature="trapezoid"`` uses tensor trapezoid weights on the closure.
    """
    if Y.grid != Z.grid:
        raise GridMismatch("inner_omega operands live on different grids")
    w = _omega_weights(Y.grid, quadrature)
    return complex(np.sum(w * np.sum(Y.data * np.conj(Z.data), axis=0)))


def norm_omega(Y: StateY, quadrature: str = "mask") -> float:
    w = _omega_weights(Y.grid, quadrature)
    return float(np.sqrt(np.sum(w * np.sum(np.abs(Y.data) ** 2, axis=0))))


def field_norm_omega(values: np.ndarray, grid: Grid3) -> float:
    """L2(Omega) norm of a scalar/vector/state array (node-mask quadrature)."""
    sq = np.abs(values) ** 2
    while sq.ndim > 3:
        sq = sq.sum(axis=0)
    return float(np.sqrt(grid.cell_volume * np.sum(sq[grid.omega_mask])))


def weighted_norm_array(values: np.ndarray, grid: Grid3, delta: float) -> float:
    """
    ||f||_{L2_delta} = (int (1+|x|^2)^delta |f|^2 dx)^(1/2) over the whole box,
    summed over leading component axes.
    """
    if not -1.0 < delta < 1.0 or delta == 0.0:
        raise ValueError(f"Weight exponent must lie in (-1, 1) minus 0, got {delta}")
    sq = np.abs(values) ** 2
    while sq.ndim > 3:
        sq = sq.sum(axis=0)
    weight = (1.0 + grid.radius_sq) ** delta
    return float(np.sqrt(grid.cell_volume * np.sum(weight * sq)))


def weighted_norm(Y: StateY, delta: float) -> float:
    """Weighted L2_delta norm of an 8-component state over the box."""
    return weighted_norm_array(Y.data, Y.grid, delta)


def sup_omega(values: np.ndarray, grid: Grid3, closed: bool = False) -> float:
    mask = grid.closure_mask if closed else grid.omega_mask
    absval = np.abs(values)
    while absval.ndim > 3:
        absval = absval.max(axis=0)
    return float(absval[mask].max()) if mask.any() else 0.0


def broadcast_vector(vector) -> np.ndarray:
    """Constant 8-vector (or 3-vector) reshaped for broadcasting over nodes."""
    v = np.asarray(vector, dtype=np.complex128)
    return v.reshape(v.shape + (1, 1, 1))
