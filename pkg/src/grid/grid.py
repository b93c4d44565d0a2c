"""
Uniform periodic computational box [-L, L)^3 housing the cube Omega = (-a, a)^3.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from src.utils.exceptions import ConfigError, GridMismatch


@dataclass(frozen=True)
class Grid3:
    """
    Node grid x_i = -L + i*h, h = 2L/n, periodic in every direction.

    The discrete cube faces sit on the node planes x_j = +-m h nearest to
    +-a, so a need not be a multiple of h. Omega nodes are those with every
    |x_j| < m h; the closure adds the face nodes.
    """
    n: int
    box_half_width: float = 2.0
    omega_half_width: float = 1.0

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ConfigError(f"Grid n must be even and >= 8, got {self.n}")
        if not 0 < self.omega_half_width < self.box_half_width:
            raise ConfigError(
                f"Need 0 < a < L, got a={self.omega_half_width}, L={self.box_half_width}"
            )
        if not 1 <= self.m < self.n // 2:
            raise ConfigError(
                f"Cube half-width a={self.omega_half_width} snaps to {self.m} cells; "
                f"need 1 <= m < n/2 = {self.n // 2}"
            )

    @property
    def L(self) -> float:
        return float(self.box_half_width)

    @property
    def a(self) -> float:
        return float(self.omega_half_width)

    @property
    def spacing(self) -> float:
        return 2.0 * self.box_half_width / self.n

    @property
    def h(self) -> float:
        return self.spacing

    @property
    def m(self) -> int:
        """Cells per half-width of the discrete cube (a/h rounded half up)."""
        return int(np.floor(self.a / self.h + 0.5 + 1e-9))

    @property
    def face_half_width(self) -> float:
        """Half-width m h of the discrete cube; equals a when a/h is an integer."""
        return self.m * self.h

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self) -> float:
        return self.h ** 3

    @property
    def rho(self) -> float:
        """Radius of the ball B(O; rho) containing the closure of Omega."""
        return self.a * np.sqrt(3.0)

    def describe(self) -> dict:
        return {'n': self.n, 'L': self.L, 'a': self.a}

    def check_same(self, other: "Grid3"):
        if self != other:
            raise GridMismatch(f"Grid mismatch: {self.describe()} vs {other.describe()}")

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape (3, n, n, n), indexing 'ij'."""
        return np.array(np.meshgrid(self.axis, self.axis, self.axis, indexing='ij'))

    @cached_property
    def radius_sq(self) -> np.ndarray:
        return np.sum(self.coords ** 2, axis=0)

    @property
    def closure_slice(self) -> slice:
        """Index range of the closed cube along any axis."""
        c = self.n // 2
        return slice(c - self.m, c + self.m + 1)

    @property
    def closure_index(self) -> Tuple[slice, slice, slice]:
        s = self.closure_slice
        return (s, s, s)

    @cached_property
    def omega_mask(self) -> np.ndarray:
        inside = np.zeros(self.n, dtype=bool)
        c = self.n // 2
        inside[c - self.m + 1:c + self.m] = True
        return inside[:, None, None] & inside[None, :, None] & inside[None, None, :]

    @cached_property
    def closure_mask(self) -> np.ndarray:
        inside = np.zeros(self.n, dtype=bool)
        inside[self.closure_slice] = True
        return inside[:, None, None] & inside[None, :, None] & inside[None, None, :]

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        """Tensor trapezoid weights of the closed cube (zero outside)."""
        w1 = np.zeros(self.n)
        w1[self.closure_slice] = self.h
        c = self.n // 2
        w1[c - self.m] *= 0.5
        w1[c + self.m] *= 0.5
        return w1[:, None, None] * w1[None, :, None] * w1[None, None, :]

    def wavenumbers(self, zero_nyquist: bool = True) -> np.ndarray:
        """Angular wavenumbers (pi/L) * Z on the FFT layout of one axis."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)
        if zero_nyquist:
            k[self.n // 2] = 0.0
        return k

    def lattice_vector(self, index) -> np.ndarray:
        """Physical frequency of an integer lattice index triple."""
        return (np.pi / self.L) * np.asarray(index, dtype=float)

    def refine(self, factor: int = 2) -> "Grid3":
        return Grid3(self.n * factor, self.box_half_width, self.omega_half_width)
