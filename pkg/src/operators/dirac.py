"""
The first-order operator P, the multiplication maps P_A, the Schrodinger
operator -Delta + Q and the boundary pairing on the cube faces.

P (f1, u1, f2, u2) = (D.u2, D f2 - D x u2, D.u1, D f1 + D x u1),  D = (1/i) grad.
"""

import numpy as np
from scipy.integrate import trapezoid

from src.grid import calculus
from src.grid.grid import Grid3
from src.grid.state import StateY, F1, F2, U1, U2
from src.operators.block_matrix import BlockMatrixField, pattern_apply
from src.utils.exceptions import GridMismatch


def apply_P_array(data: np.ndarray, grid: Grid3, method: str = calculus.SPECTRAL,
                  shift=None) -> np.ndarray:
    out = np.empty_like(data, dtype=np.complex128)
    kw = dict(method=method, shift=shift)
    out[F1] = -1j * calculus.div(data[U2], grid, **kw)
    out[U1] = -1j * (calculus.grad(data[F2], grid, **kw) - calculus.curl(data[U2], grid, **kw))
    out[F2] = -1j * calculus.div(data[U1], grid, **kw)
    out[U2] = -1j * (calculus.grad(data[F1], grid, **kw) + calculus.curl(data[U1], grid, **kw))
    return out


def apply_P(Y: StateY, method: str = calculus.SPECTRAL, shift=None) -> StateY:
    """P Y with the spectral path by default."""
    return StateY(Y.grid, apply_P_array(Y.data, Y.grid, method=method, shift=shift))


def apply_PA(A: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """P_A Z = (1/i) P[A] Z for a (possibly complex) vector A."""
    return -1j * pattern_apply(A, Z)


def apply_schrodinger(Q: BlockMatrixField, Z: StateY, method: str = calculus.SPECTRAL,
                      shift=None) -> StateY:
    """(-Delta I8 + Q) Z."""
    if Q.grid != Z.grid:
        raise GridMismatch("Potential and state live on different grids")
    lap = calculus.laplacian(Z.data, Z.grid, method=method, shift=shift)
    return StateY(Z.grid, -lap + Q.apply(Z.data))


def envelope_schrodinger(Q: BlockMatrixField, zeta: np.ndarray, V: np.ndarray,
                         grid: Grid3, shift=None) -> np.ndarray:
    """
    exp(-i zeta.x) (-Delta + Q)(exp(i zeta.x) V)
        = (-Delta - 2i zeta.grad + zeta.zeta) V + Q V.
    """
    lap = calculus.laplacian(V, grid, shift=shift)
    kv = calculus.wave_vectors(grid, shift)
    F = calculus.to_fourier(V, grid, shift)
    drift = calculus.from_fourier(1j * (zeta[0] * kv[0] + zeta[1] * kv[1] + zeta[2] * kv[2]) * F,
                                  grid, shift)
    return -lap - 2j * drift + np.dot(zeta, zeta) * V + Q.apply(V)


FACES = tuple((axis, side) for axis in range(3) for side in (-1, 1))


def face_index(grid: Grid3, axis: int, side: int):
    """Array index selecting the closure nodes of one cube face."""
    s = grid.closure_slice
    c = grid.n // 2
    plane = c - grid.m if side < 0 else c + grid.m
    idx = [s, s, s]
    idx[axis] = plane
    return tuple(idx)


def face_integral(values: np.ndarray, grid: Grid3) -> complex:
    """Trapezoid integral of a (2m+1)^2 face array."""
    h = grid.h
    return complex(trapezoid(trapezoid(values, dx=h, axis=-1), dx=h, axis=-1))


def boundary_pairing(Y: StateY, Z: StateY) -> complex:
    """
    <P_N Y, Z>_{dOmega} face by face with the outward unit normal N.
    """
    if Y.grid != Z.grid:
        raise GridMismatch("boundary_pairing operands live on different grids")
    grid = Y.grid
    total = 0.0 + 0.0j
    for axis, side in FACES:
        idx = face_index(grid, axis, side)
        y = Y.data[(slice(None),) + idx]
        z = Z.data[(slice(None),) + idx]
        normal = np.zeros(3)
        normal[axis] = side
        pn_y = apply_PA(normal, y)
        total += face_integral(np.sum(pn_y * np.conj(z), axis=0), grid)
    return total
