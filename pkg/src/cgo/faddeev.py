"""
Faddeev Green's operator G_zeta, the Fourier-multiplier inverse of
-Delta - 2i zeta.grad on the periodic box.

The lattice is shifted by s = (pi / 2L) Im zeta / |Im zeta| so the symbol
|xi|^2 + 2 zeta.xi stays away from zero; the output lives in the
quasi-periodic class exp(i s.x) * periodic.
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union
import logging

import numpy as np

from src.grid import calculus
from src.grid.grid import Grid3
from src.grid.state import StateY, weighted_norm_array
from src.utils.exceptions import NumericFailure

logger = logging.getLogger(__name__)

MAX_FLOORED_FRACTION = 0.01


def zeta_constraint_error(zeta: np.ndarray, k0_sq: float) -> float:
    """|zeta.zeta - k0^2| relative to |zeta|^2."""
    zeta = np.asarray(zeta, dtype=np.complex128)
    scale = max(float(np.sum(np.abs(zeta) ** 2)), 1.0)
    return float(abs(np.dot(zeta, zeta) - k0_sq) / scale)


@dataclass(frozen=True)
class FaddeevConfig:
    zeta: np.ndarray
    k0_sq: float
    delta: float = -0.5
    symbol_floor: float = 1e-6
    lattice_shift: bool = True

    def __post_init__(self):
        zeta = np.asarray(self.zeta, dtype=np.complex128)
        if zeta.shape != (3,):
            raise ValueError(f"zeta must be a complex 3-vector, got shape {zeta.shape}")
        object.__setattr__(self, 'zeta', zeta)
        if np.linalg.norm(zeta.imag) == 0:
            raise ValueError("Im zeta must be nonzero for the Faddeev operator")
        err = zeta_constraint_error(zeta, self.k0_sq)
        if err > 1e-12:
            raise ValueError(f"zeta.zeta != omega^2 eps0 mu0 (relative error {err:.3e})")
        if not -1.0 < self.delta < 0.0:
            raise ValueError(f"delta must lie in (-1, 0), got {self.delta}")
        if self.symbol_floor <= 0:
            raise ValueError(f"symbol_floor must be positive, got {self.symbol_floor}")

    @property
    def zeta_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.zeta) ** 2)))

    def shift(self, grid: Grid3) -> Optional[np.ndarray]:
        if not self.lattice_shift:
            return None
        im = self.zeta.imag
        return (np.pi / (2.0 * grid.L)) * im / np.linalg.norm(im)


def _symbol(cfg: FaddeevConfig, grid: Grid3, shift) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
    kv = calculus.wave_vectors(grid, shift)
    z = cfg.zeta
    symbol = (kv[0] ** 2 + kv[1] ** 2 + kv[2] ** 2
              + 2.0 * (z[0] * kv[0] + z[1] * kv[1] + z[2] * kv[2]))
    return symbol, kv


def _inverse_symbol(cfg: FaddeevConfig, grid: Grid3, shift) -> Tuple[np.ndarray, int, Tuple]:
    symbol, kv = _symbol(cfg, grid, shift)
    floored = np.abs(symbol) < cfg.symbol_floor * cfg.zeta_norm ** 2
    count = int(floored.sum())
    if count > MAX_FLOORED_FRACTION * symbol.size:
        raise NumericFailure(
            f"{count} of {symbol.size} Faddeev modes fall below the symbol floor"
        )
    inv = np.zeros(symbol.shape, dtype=np.complex128)
    inv[~floored] = 1.0 / symbol[~floored]
    return inv, count, kv


def gzeta_apply(cfg: FaddeevConfig, f: Union[np.ndarray, StateY],
                grid: Optional[Grid3] = None) -> Tuple[Union[np.ndarray, StateY], int]:
    """
    G_zeta f for a scalar field or any (..., n, n, n) stack, returning the
    result and the number of floored lattice modes.
    """
    if isinstance(f, StateY):
        out, count = gzeta_apply(cfg, f.data, f.grid)
        return StateY(f.grid, out), count
    if grid is None:
        raise ValueError("gzeta_apply needs the grid for raw arrays")
    shift = cfg.shift(grid)
    inv, count, _ = _inverse_symbol(cfg, grid, shift)
    if count:
        logger.debug(f"Faddeev: {count} floored modes at |zeta|={cfg.zeta_norm:.3g}")
    F = calculus.to_fourier(f, grid, shift)
    return calculus.from_fourier(F * inv, grid, shift), count


def gzeta_derivatives(cfg: FaddeevConfig, f: np.ndarray, grid: Grid3) -> np.ndarray:
    """d_j G_zeta f for j = 1, 2, 3 (leading axis)."""
    shift = cfg.shift(grid)
    inv, _, kv = _inverse_symbol(cfg, grid, shift)
    F = calculus.to_fourier(f, grid, shift) * inv
    return np.array([calculus.from_fourier(1j * kv[j] * F, grid, shift) for j in range(3)])


def gzeta_norm_ratio(cfg: FaddeevConfig, f: np.ndarray, grid: Grid3) -> float:
    """||G f||_{L2_delta} / ||f||_{L2_{delta+1}}; zero input gives 0."""
    denom = weighted_norm_array(f, grid, cfg.delta + 1.0)
    if denom == 0:
        return 0.0
    out, _ = gzeta_apply(cfg, f, grid)
    return weighted_norm_array(out, grid, cfg.delta) / denom


def gzeta_derivative_bound(cfg: FaddeevConfig, f: np.ndarray, grid: Grid3) -> float:
    """max_j ||d_j G f||_{L2_delta} / ||f||_{L2_{delta+1}}."""
    denom = weighted_norm_array(f, grid, cfg.delta + 1.0)
    if denom == 0:
        return 0.0
    derivs = gzeta_derivatives(cfg, f, grid)
    return max(weighted_norm_array(derivs[j], grid, cfg.delta) for j in range(3)) / denom


def faddeev_operator(cfg: FaddeevConfig, u: np.ndarray, grid: Grid3) -> np.ndarray:
    """(-Delta - 2i zeta.grad) u in the shifted class of cfg."""
    shift = cfg.shift(grid)
    symbol, _ = _symbol(cfg, grid, shift)
    return calculus.from_fourier(symbol * calculus.to_fourier(u, grid, shift), grid, shift)


def zeta_with_norm(direction_re: np.ndarray, direction_im: np.ndarray, modulus: float,
                   k0_sq: float) -> np.ndarray:
    """
    zeta = t e_re + i r e_im with orthonormal e_re, e_im, zeta.zeta = k0^2 and
    |zeta| = modulus (needs modulus^2 >= k0^2).
    """
    e_re = np.asarray(direction_re, dtype=float)
    e_im = np.asarray(direction_im, dtype=float)
    e_re = e_re / np.linalg.norm(e_re)
    e_im = e_im - np.dot(e_im, e_re) * e_re
    e_im = e_im / np.linalg.norm(e_im)
    if modulus ** 2 < k0_sq:
        raise ValueError(f"|zeta| = {modulus} too small for zeta.zeta = {k0_sq}")
    # t^2 - r^2 = k0^2 and t^2 + r^2 = modulus^2
    t = np.sqrt((modulus ** 2 + k0_sq) / 2.0)
    r = np.sqrt((modulus ** 2 - k0_sq) / 2.0)
    return t * e_re + 1j * r * e_im
