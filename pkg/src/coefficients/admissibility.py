"""
Admissibility report for a coefficient pair: ellipticity, the boundary
C^{0,1} norm and the interior W^{2,inf} / H^{2+s} proxies. Failures are
reported, never raised.
"""

from dataclasses import dataclass, field, asdict
from typing import Dict

import numpy as np
from scipy.spatial import cKDTree

from src.coefficients.pair import CoefficientPair
from src.grid import calculus
from src.grid.grid import Grid3


@dataclass
class AdmissibilityReport:
    ellipticity: bool
    boundary_lipschitz: bool
    interior_w2inf: bool
    interior_h2s: bool
    measured: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.ellipticity and self.boundary_lipschitz and self.interior_w2inf and self.interior_h2s

    def to_dict(self) -> dict:
        out = asdict(self)
        out['passed'] = self.passed
        return out


def boundary_nodes(grid: Grid3) -> np.ndarray:
    """Indices (k, 3) of closure nodes lying on the cube faces."""
    s = grid.closure_slice
    idx = np.arange(s.start, s.stop)
    I, J, K = np.meshgrid(idx, idx, idx, indexing='ij')
    lo, hi = s.start, s.stop - 1
    on_face = (I == lo) | (I == hi) | (J == lo) | (J == hi) | (K == lo) | (K == hi)
    return np.stack([I[on_face], J[on_face], K[on_face]], axis=1)


def boundary_c01_norm(f: np.ndarray, grid: Grid3, reach: float = 3.0) -> float:
    """
    sup |f| on the boundary plus the largest Lipschitz quotient over
    boundary node pairs closer than reach*h.
    """
    nodes = boundary_nodes(grid)
    values = f[nodes[:, 0], nodes[:, 1], nodes[:, 2]]
    points = grid.axis[nodes]
    tree = cKDTree(points)
    pairs = tree.query_pairs(r=reach * grid.h + 1e-12, output_type='ndarray')
    sup = float(np.abs(values).max())
    if len(pairs) == 0:
        return sup
    dist = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
    quotient = np.abs(values[pairs[:, 0]] - values[pairs[:, 1]]) / dist
    return sup + float(quotient.max())


def w2inf_norm(f: np.ndarray, grid: Grid3) -> float:
    """Discrete W^{2,inf}(Omega): sup of f, its gradient and stencil second differences."""
    f = f.astype(np.complex128)
    mask = grid.omega_mask
    g = calculus.grad(f, grid, method=calculus.FD)
    H = calculus.hessian(f, grid, method=calculus.FD)
    return float(
        np.abs(f[mask]).max()
        + np.sqrt(np.sum(np.abs(g) ** 2, axis=0))[mask].max()
        + np.sqrt(np.sum(np.abs(H) ** 2, axis=(0, 1)))[mask].max()
    )


def sobolev_proxy(f: np.ndarray, grid: Grid3, s: float) -> float:
    """(sum (1+|xi|^2)^s |f_hat(xi)|^2 / (2L)^3)^(1/2) over the box lattice."""
    F = np.fft.fftn(f) * grid.cell_volume
    kv = calculus.wave_vectors(grid)
    weight = (1.0 + kv[0] ** 2 + kv[1] ** 2 + kv[2] ** 2) ** s
    return float(np.sqrt(np.sum(weight * np.abs(F) ** 2) / (2 * grid.L) ** 3))


def h2s_norm(f: np.ndarray, background: complex, grid: Grid3, s: float) -> float:
    """
    H^{2+s}(Omega) proxy: Fourier-weighted norm of the deviation from the
    background plus the exact Omega norm of the constant background.
    """
    deviation = sobolev_proxy(f - background, grid, 2.0 + s)
    volume = (2 * grid.face_half_width) ** 3
    return deviation + abs(background) * np.sqrt(volume)


def check_admissible(c: CoefficientPair) -> AdmissibilityReport:
    grid = c.grid
    M = c.a_priori_M
    min_re_gamma = float(c.gamma.real.min())
    min_mu = float(c.mu.min())
    min_im_gamma = float(c.gamma.imag.min())
    elliptic = min_re_gamma >= 1.0 / M and min_mu >= 1.0 / M and min_im_gamma >= 0.0

    bnd_gamma = boundary_c01_norm(c.gamma, grid)
    bnd_mu = boundary_c01_norm(c.mu, grid)
    w2_gamma = w2inf_norm(c.gamma, grid)
    w2_mu = w2inf_norm(c.mu, grid)
    hs_gamma = h2s_norm(c.gamma, c.eps0, grid, c.sobolev_s)
    hs_mu = h2s_norm(c.mu, c.mu0, grid, c.sobolev_s)

    measured = {
        'min_re_gamma': min_re_gamma,
        'min_mu': min_mu,
        'min_im_gamma': min_im_gamma,
        'boundary_c01_gamma': bnd_gamma,
        'boundary_c01_mu': bnd_mu,
        'w2inf_gamma': w2_gamma,
        'w2inf_mu': w2_mu,
        'h2s_gamma': hs_gamma,
        'h2s_mu': hs_mu,
    }
    return AdmissibilityReport(
        ellipticity=bool(elliptic),
        boundary_lipschitz=bool(bnd_gamma + bnd_mu <= M),
        interior_w2inf=bool(w2_gamma + w2_mu <= M),
        interior_h2s=bool(hs_gamma + hs_mu <= M),
        measured=measured,
    )
