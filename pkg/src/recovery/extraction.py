"""
Sweep of the pairing over the Fourier lattice |xi| <= R, inversion of the
lattice samples, and the norm diagnostics applied to the extracted f.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np
from tqdm import tqdm

from src.coefficients.admissibility import sobolev_proxy
from src.coefficients.pair import CoefficientPair, derive_scalars
from src.grid import calculus
from src.grid.grid import Grid3
from src.recovery.pairing import ALPHA, BETA, pairing_q_diff, q_difference
from src.recovery.zeta import RecoveryConfig, make_zeta_pair
from src.utils.exceptions import NumericFailure

logger = logging.getLogger(__name__)

AXIS_OFFSETS = tuple(tuple(int(v) for v in sign * np.eye(3, dtype=int)[j])
                     for j in range(3) for sign in (1, -1))


@dataclass
class FourierSamples:
    """Values of a Fourier transform at integer lattice indices j, xi = (pi/L) j."""
    grid: Grid3
    rcut: float
    values: Dict[Tuple[int, int, int], complex] = field(default_factory=dict)
    failed: List[Tuple[int, int, int]] = field(default_factory=list)

    def xi(self, index) -> np.ndarray:
        return self.grid.lattice_vector(index)

    def to_array(self) -> np.ndarray:
        """Samples in FFT layout, zero outside the lattice ball."""
        n = self.grid.n
        F = np.zeros(self.grid.shape, dtype=np.complex128)
        for (i, j, k), value in self.values.items():
            if max(abs(i), abs(j), abs(k)) >= n // 2:
                continue
            F[i % n, j % n, k % n] = value
        return F

    def inverse(self) -> np.ndarray:
        """f(x) = (2L)^-3 sum_xi f_hat(xi) exp(i xi.x) on the nodes."""
        grid = self.grid
        n = grid.n
        j = np.fft.fftfreq(n, d=1.0 / n).astype(int)
        sign = ((-1.0) ** j[:, None, None]) * ((-1.0) ** j[None, :, None]) * ((-1.0) ** j[None, None, :])
        return n ** 3 / (2.0 * grid.L) ** 3 * np.fft.ifftn(self.to_array() * sign)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)


def lattice_indices(grid: Grid3, rcut: float) -> List[Tuple[int, int, int]]:
    """Nonzero integer triples with |xi| <= rcut, inside the grid's Nyquist box."""
    step = np.pi / grid.L
    reach = min(int(np.floor(rcut / step)), grid.n // 2 - 1)
    out = []
    r = np.arange(-reach, reach + 1)
    for i in r:
        for j in r:
            for k in r:
                if (i, j, k) == (0, 0, 0):
                    continue
                if step * np.sqrt(i * i + j * j + k * k) <= rcut + 1e-12:
                    out.append((int(i), int(j), int(k)))
    return out


def zero_mode(samples: Dict[Tuple[int, int, int], complex]) -> complex:
    """
    Quadratic extrapolation (4 avg1 - avg2) / 3 from the axis modes at one and
    two steps. Each average runs over the axis modes present in samples.
    """
    first = [samples[o] for o in AXIS_OFFSETS if o in samples]
    second = [samples[o] for o in (tuple(2 * v for v in o) for o in AXIS_OFFSETS) if o in samples]
    if not first or not second:
        raise NumericFailure(
            f"xi = 0 extrapolation needs axis modes at one and two steps, "
            f"have {len(first)} and {len(second)}"
        )
    return complex((4.0 * np.mean(first) - np.mean(second)) / 3.0)


def extract_fg_hat(c1: CoefficientPair, c2: CoefficientPair, cfg: RecoveryConfig,
                   show_progress: bool = False) -> Tuple[FourierSamples, FourierSamples]:
    """
    f_hat(xi) from alpha-mode pairings and g_hat(xi) from beta-mode pairings
    for every lattice xi with 0 < |xi| <= R. The xi = 0 sample is extrapolated
    from the axis modes. Raises NumericFailure when more than the configured
    fraction of modes fails.
    """
    grid = c1.grid
    rcut = cfg.cutoff()
    indices = lattice_indices(grid, rcut)
    known = set(indices)
    aux = list(AXIS_OFFSETS) + [tuple(2 * v for v in o) for o in AXIS_OFFSETS]
    sweep = indices + [a for a in aux if a not in known]

    d1 = derive_scalars(c1)
    d2 = derive_scalars(c2)
    dQ = q_difference(c1, c2, d1, d2)
    logger.info(f"Extracting f_hat, g_hat on {len(indices)} modes (R={rcut:.3f}, tau={cfg.tau:g})")

    def run(index):
        zp = make_zeta_pair(grid.lattice_vector(index), cfg.tau, c1.k0_sq)
        f = pairing_q_diff(c1, c2, zp, ALPHA, cfg, d1, d2, dQ)
        g = pairing_q_diff(c1, c2, zp, BETA, cfg, d1, d2, dQ)
        return f, g

    f_values: Dict[Tuple[int, int, int], complex] = {}
    g_values: Dict[Tuple[int, int, int], complex] = {}
    failed: List[Tuple[int, int, int]] = []
    with ThreadPoolExecutor(max_workers=max(1, cfg.threads)) as executor:
        futures = {executor.submit(run, index): index for index in sweep}
        for future in tqdm(futures, total=len(futures), desc="xi lattice", disable=not show_progress):
            index = futures[future]
            try:
                f_values[index], g_values[index] = future.result()
            except NumericFailure as e:
                logger.warning(f"Mode {index} failed: {e}")
                failed.append(index)

    if len(failed) > cfg.abort_fraction * len(sweep):
        raise NumericFailure(
            f"{len(failed)} of {len(sweep)} lattice modes failed "
            f"(limit {cfg.abort_fraction:.0%})"
        )

    f_hat = FourierSamples(grid, rcut, {i: f_values[i] for i in indices if i in f_values}, sorted(failed))
    g_hat = FourierSamples(grid, rcut, {i: g_values[i] for i in indices if i in g_values}, sorted(failed))
    f_hat.values[(0, 0, 0)] = zero_mode(f_values)
    g_hat.values[(0, 0, 0)] = zero_mode(g_values)
    return f_hat, g_hat


def sobolev_truncation(f: np.ndarray, grid: Grid3, R: float) -> np.ndarray:
    """Drop the Fourier modes with |k| > R."""
    kv = calculus.wave_vectors(grid)
    keep = kv[0] ** 2 + kv[1] ** 2 + kv[2] ** 2 <= R ** 2
    return np.fft.ifftn(np.fft.fftn(f) * keep)


def interpolation_check(f: np.ndarray, grid: Grid3, s1: float, s2: float) -> Dict[str, float]:
    """||f||_L2 against ||f||_{H^s1}^theta ||f||_{H^s2}^(1-theta) with 0 = theta s1 + (1-theta) s2."""
    theta = s2 / (s2 - s1)
    l2 = sobolev_proxy(f, grid, 0.0)
    hs1 = sobolev_proxy(f, grid, s1)
    hs2 = sobolev_proxy(f, grid, s2)
    bound = hs1 ** theta * hs2 ** (1.0 - theta)
    return {'l2': l2, 'h_s1': hs1, 'h_s2': hs2, 'bound': bound,
            'ratio': l2 / bound if bound > 0 else 0.0}


def tail_check(f: np.ndarray, grid: Grid3, R: float, s2: float) -> Dict[str, float]:
    """||f - f_R||_L2 against (1 + R^2)^(-s2/2) ||f||_{H^s2}."""
    tail = sobolev_proxy(f - sobolev_truncation(f, grid, R), grid, 0.0)
    bound = (1.0 + R ** 2) ** (-s2 / 2.0) * sobolev_proxy(f, grid, s2)
    return {'tail': tail, 'bound': bound, 'ratio': tail / bound if bound > 0 else 0.0}
