"""
Sparse 8x8 matrices of scalar fields acting pointwise on StateY.
"""

from typing import Dict, Iterable, Tuple, Union

import numpy as np

from src.grid.grid import Grid3
from src.grid.state import StateY, F1, F2, U1_IDX, U2_IDX
from src.utils.exceptions import GridMismatch

Entry = Union[complex, np.ndarray]


class BlockMatrixField:
    """
    An 8x8 matrix whose entries are scalar fields (or constants).

    Only structurally nonzero entries are stored; ``pattern`` lists them.
    """

    def __init__(self, grid: Grid3, entries: Dict[Tuple[int, int], Entry] = None):
        self.grid = grid
        self.entries: Dict[Tuple[int, int], Entry] = {}
        for (r, c), value in (entries or {}).items():
            self.add(r, c, value)

    @property
    def pattern(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(sorted(self.entries))

    def add(self, r: int, c: int, value: Entry):
        if not (0 <= r < 8 and 0 <= c < 8):
            raise IndexError(f"Block index ({r}, {c}) outside 8x8")
        if np.ndim(value) not in (0, 3):
            raise ValueError("Block entries must be scalars or scalar fields")
        if (r, c) in self.entries:
            self.entries[(r, c)] = self.entries[(r, c)] + value
        else:
            self.entries[(r, c)] = value

    def add_vector_row(self, r: int, cols: Iterable[int], vec: np.ndarray, sign: float = 1.0):
        """Row r times (vec . u) over the given 3 columns."""
        for j, c in enumerate(cols):
            self.add(r, c, sign * vec[j])

    def add_vector_col(self, rows: Iterable[int], c: int, vec: np.ndarray, sign: float = 1.0):
        for j, r in enumerate(rows):
            self.add(r, c, sign * vec[j])

    def add_cross(self, rows: Iterable[int], cols: Iterable[int], vec: np.ndarray, sign: float = 1.0):
        """Block sign * [vec x], the matrix of u -> vec x u."""
        rows, cols = tuple(rows), tuple(cols)
        v1, v2, v3 = vec[0], vec[1], vec[2]
        self.add(rows[0], cols[1], -sign * v3)
        self.add(rows[0], cols[2], sign * v2)
        self.add(rows[1], cols[0], sign * v3)
        self.add(rows[1], cols[2], -sign * v1)
        self.add(rows[2], cols[0], -sign * v2)
        self.add(rows[2], cols[1], sign * v1)

    def add_block(self, rows: Iterable[int], cols: Iterable[int], block):
        """Add a 3x3 block of fields, block[i][j]."""
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                self.add(r, c, block[i][j])

    def entry(self, r: int, c: int) -> Entry:
        return self.entries.get((r, c), 0.0)

    def apply(self, Z: Union[StateY, np.ndarray]) -> Union[StateY, np.ndarray]:
        """Pointwise product M(x) Z(x)."""
        if isinstance(Z, StateY):
            if Z.grid != self.grid:
                raise GridMismatch("Block matrix and state live on different grids")
            return StateY(self.grid, self._apply_array(Z.data))
        return self._apply_array(np.asarray(Z))

    def _apply_array(self, data: np.ndarray) -> np.ndarray:
        out = np.zeros(np.broadcast_shapes(data.shape, (8,) + self.grid.shape), dtype=np.complex128)
        for (r, c), value in self.entries.items():
            out[r] += value * data[c]
        return out

    def transpose(self) -> "BlockMatrixField":
        return BlockMatrixField(self.grid, {(c, r): v for (r, c), v in self.entries.items()})

    def conj(self) -> "BlockMatrixField":
        return BlockMatrixField(self.grid, {k: np.conj(v) for k, v in self.entries.items()})

    def adjoint(self) -> "BlockMatrixField":
        return self.transpose().conj()

    def scaled(self, factor: complex) -> "BlockMatrixField":
        return BlockMatrixField(self.grid, {k: factor * v for k, v in self.entries.items()})

    def __add__(self, other: "BlockMatrixField") -> "BlockMatrixField":
        if other.grid != self.grid:
            raise GridMismatch("Block matrices live on different grids")
        out = BlockMatrixField(self.grid, dict(self.entries))
        for (r, c), v in other.entries.items():
            out.add(r, c, v)
        return out

    def plus_identity(self, value: Entry) -> "BlockMatrixField":
        out = BlockMatrixField(self.grid, dict(self.entries))
        for i in range(8):
            out.add(i, i, value)
        return out

    def at_node(self, index: Tuple[int, int, int]) -> np.ndarray:
        """Dense 8x8 matrix at one grid node."""
        dense = np.zeros((8, 8), dtype=np.complex128)
        for (r, c), v in self.entries.items():
            dense[r, c] = v[index] if np.ndim(v) == 3 else v
        return dense

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(v))) for v in self.entries.values()), default=0.0)


def pattern_apply(v: np.ndarray, Z: np.ndarray, prime: bool = False) -> np.ndarray:
    """
    Pattern operator with a vector v in place of D:

        P[v]  Z = (v.u2, v f2 - v x u2, v.u1, v f1 + v x u1)
        P'[v] Z = (v.u2, v f2 + v x u2, v.u1, v f1 - v x u1)

    v is a constant 3-vector or a vector field; Z an (8, ...) array.
    """
    v = np.asarray(v)
    if v.ndim == 1:
        v = v.reshape((3,) + (1,) * (Z.ndim - 1))
    f1, u1, f2, u2 = Z[F1], Z[list(U1_IDX)], Z[F2], Z[list(U2_IDX)]
    sign = -1.0 if prime else 1.0
    out = np.empty(np.broadcast_shapes(Z.shape, (8,) + v.shape[1:]), dtype=np.complex128)
    out[F1] = np.sum(v * u2, axis=0)
    out[list(U1_IDX)] = v * f2 - sign * np.cross(v, u2, axis=0)
    out[F2] = np.sum(v * u1, axis=0)
    out[list(U2_IDX)] = v * f1 + sign * np.cross(v, u1, axis=0)
    return out
