"""
Discrete vector calculus on Grid3.

Two paths share one interface:

* ``method="spectral"`` (default): FFT derivatives on the periodic box. The
  first-derivative symbol is i*k with the Nyquist wavenumber zeroed and the
  Laplacian uses -|k|^2 with the same k, so every discrete identity that
  holds for symbols (curl grad = 0, div curl = 0, P o P = -Delta) holds to
  round-off. A real ``shift`` s handles quasi-periodic fields
  f = exp(i s.x) * periodic.
* ``method="fd"``: centered second-order differences with periodic wrap and
  the 7-point Laplacian. Local, so it is used for fields whose periodic
  class is mixed, evaluated on the Omega interior only.
"""

from typing import Optional, Sequence

import numpy as np

from src.grid.grid import Grid3

SPECTRAL = "spectral"
FD = "fd"


def _check_method(method: str):
    if method not in (SPECTRAL, FD):
        raise ValueError(f"Unknown derivative method: {method}")


def wave_vectors(grid: Grid3, shift: Optional[Sequence[float]] = None):
    """
    Broadcastable wave-vector components (k1, k2, k3) including the shift.
    """
    k = grid.wavenumbers(zero_nyquist=True)
    s = np.zeros(3) if shift is None else np.asarray(shift, dtype=float)
    return (
        (k + s[0])[:, None, None],
        (k + s[1])[None, :, None],
        (k + s[2])[None, None, :],
    )


def shift_phase(grid: Grid3, shift: Optional[Sequence[float]]) -> Optional[np.ndarray]:
    """exp(i s.x) on the nodes, or None for the periodic class."""
    if shift is None or not np.any(np.asarray(shift)):
        return None
    s = np.asarray(shift, dtype=float)
    return np.exp(1j * np.tensordot(s, grid.coords, axes=1))


def to_fourier(f: np.ndarray, grid: Grid3, shift=None) -> np.ndarray:
    """FFT over the last three axes after removing the shift phase."""
    phase = shift_phase(grid, shift)
    g = f if phase is None else f * np.conj(phase)
    return np.fft.fftn(g, axes=(-3, -2, -1))


def from_fourier(F: np.ndarray, grid: Grid3, shift=None) -> np.ndarray:
    g = np.fft.ifftn(F, axes=(-3, -2, -1))
    phase = shift_phase(grid, shift)
    return g if phase is None else g * phase


def _fd_partial(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    ax = f.ndim - 3 + axis
    return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * h)


def partial(f: np.ndarray, grid: Grid3, axis: int, method: str = SPECTRAL, shift=None) -> np.ndarray:
    """d f / d x_axis over the last three array axes."""
    _check_method(method)
    if method == FD:
        return _fd_partial(f, grid.h, axis)
    kv = wave_vectors(grid, shift)
    return from_fourier(1j * kv[axis] * to_fourier(f, grid, shift), grid, shift)


def grad(f: np.ndarray, grid: Grid3, method: str = SPECTRAL, shift=None) -> np.ndarray:
    """Gradient of a scalar field, shape (3, n, n, n)."""
    _check_method(method)
    if method == FD:
        return np.array([_fd_partial(f, grid.h, j) for j in range(3)])
    F = to_fourier(f, grid, shift)
    kv = wave_vectors(grid, shift)
    return np.array([from_fourier(1j * kv[j] * F, grid, shift) for j in range(3)])


def div(u: np.ndarray, grid: Grid3, method: str = SPECTRAL, shift=None) -> np.ndarray:
    _check_method(method)
    if method == FD:
        return sum(_fd_partial(u[j], grid.h, j) for j in range(3))
    kv = wave_vectors(grid, shift)
    U = to_fourier(u, grid, shift)
    return from_fourier(1j * (kv[0] * U[0] + kv[1] * U[1] + kv[2] * U[2]), grid, shift)


def curl(u: np.ndarray, grid: Grid3, method: str = SPECTRAL, shift=None) -> np.ndarray:
    _check_method(method)
    if method == FD:
        d = lambda comp, ax: _fd_partial(u[comp], grid.h, ax)
        return np.array([
            d(2, 1) - d(1, 2),
            d(0, 2) - d(2, 0),
            d(1, 0) - d(0, 1),
        ])
    kv = wave_vectors(grid, shift)
    U = to_fourier(u, grid, shift)
    C = 1j * np.array([
        kv[1] * U[2] - kv[2] * U[1],
        kv[2] * U[0] - kv[0] * U[2],
        kv[0] * U[1] - kv[1] * U[0],
    ])
    return from_fourier(C, grid, shift)


def laplacian(f: np.ndarray, grid: Grid3, method: str = SPECTRAL, shift=None) -> np.ndarray:
    """Laplacian over the last three axes (7-point stencil on the fd path)."""
    _check_method(method)
    if method == FD:
        out = -6.0 * f
        for j in range(3):
            ax = f.ndim - 3 + j
            out = out + np.roll(f, 1, axis=ax) + np.roll(f, -1, axis=ax)
        return out / grid.h ** 2
    kv = wave_vectors(grid, shift)
    ksq = kv[0] ** 2 + kv[1] ** 2 + kv[2] ** 2
    return from_fourier(-ksq * to_fourier(f, grid, shift), grid, shift)


def hessian(f: np.ndarray, grid: Grid3, method: str = SPECTRAL) -> np.ndarray:
    """
    Second derivatives d_j d_k f, shape (3, 3, n, n, n).

    On the fd path the diagonal uses the 3-point second difference so the
    trace equals the 7-point Laplacian; off-diagonal entries compose the
    centered first differences.
    """
    _check_method(method)
    out = np.empty((3, 3) + f.shape, dtype=np.result_type(f, np.complex128))
    if method == FD:
        h = grid.h
        for j in range(3):
            out[j, j] = (np.roll(f, 1, axis=j) - 2.0 * f + np.roll(f, -1, axis=j)) / h ** 2
            for k in range(j + 1, 3):
                out[j, k] = _fd_partial(_fd_partial(f, h, j), h, k)
                out[k, j] = out[j, k]
        return out
    kv = wave_vectors(grid)
    F = np.fft.fftn(f)
    for j in range(3):
        for k in range(j, 3):
            out[j, k] = np.fft.ifftn(-kv[j] * kv[k] * F)
            out[k, j] = out[j, k]
    return out


def d_operator(f: np.ndarray, grid: Grid3, method: str = SPECTRAL, shift=None) -> np.ndarray:
    """D = (1/i) grad."""
    return -1j * grad(f, grid, method=method, shift=shift)
