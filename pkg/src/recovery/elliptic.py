"""
Recovery of phi1 = gamma1^(1/2) - gamma2^(1/2) and phi2 = mu1^(1/2) - mu2^(1/2)
from f and g through the coupled elliptic system

    Lap phi1 + q_f phi1 + p_f phi2 = gamma1^(1/2) f,
    Lap phi2 + q_g phi2 + p_g phi1 = mu1^(1/2) g,

with Dirichlet values on the faces. q_f and q_g contain the unknown second
pair, so the system is solved by Picard iteration with one sparse LU per step.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.coefficients.pair import CoefficientPair
from src.grid.field_io import write_field
from src.grid.grid import Grid3
from src.recovery.extraction import FourierSamples, interpolation_check, tail_check
from src.recovery.zeta import RecoveryConfig
from src.utils.exceptions import NoConvergence
from src.utils.helpers import write_json

logger = logging.getLogger(__name__)


def laplacian_7pt(k: int, h: float) -> sp.csr_matrix:
    """Dirichlet 7-point Laplacian on a k^3 block of nodes (C order)."""
    d2 = sp.diags([np.ones(k - 1), -2.0 * np.ones(k), np.ones(k - 1)], [-1, 0, 1], format='csr') / h ** 2
    eye = sp.identity(k, format='csr')
    return (sp.kron(sp.kron(d2, eye), eye) + sp.kron(sp.kron(eye, d2), eye)
            + sp.kron(sp.kron(eye, eye), d2)).tocsr()


def lap7_nodes(u: np.ndarray, grid: Grid3) -> np.ndarray:
    """7-point Laplacian of a node field (periodic wrap; read on the Omega interior)."""
    out = -6.0 * u
    for axis in range(3):
        out = out + np.roll(u, 1, axis=axis) + np.roll(u, -1, axis=axis)
    return out / grid.h ** 2


def elliptic_coefficients(c1: CoefficientPair, sqrt_gamma2: np.ndarray,
                          sqrt_mu2: np.ndarray) -> Tuple[np.ndarray, ...]:
    """
    q_f = -(Lap gamma2^(1/2) / gamma2^(1/2) + w^2 gamma1^(1/2) (gamma1^(1/2) mu1 + gamma2^(1/2) mu2)),
    p_f = -w^2 gamma1 gamma2^(1/2) (mu1^(1/2) + mu2^(1/2)), and q_g, p_g with gamma and mu swapped.
    """
    grid = c1.grid
    w2 = c1.omega ** 2
    g1 = np.sqrt(c1.gamma)
    m1 = np.sqrt(c1.mu.astype(np.complex128))
    g2, m2 = sqrt_gamma2, sqrt_mu2
    q_f = -(lap7_nodes(g2, grid) / g2 + w2 * g1 * (g1 * c1.mu + g2 * m2 ** 2))
    p_f = -w2 * c1.gamma * g2 * (m1 + m2)
    q_g = -(lap7_nodes(m2, grid) / m2 + w2 * m1 * (m1 * c1.gamma + m2 * g2 ** 2))
    p_g = -w2 * c1.mu * m2 * (g1 + g2)
    return q_f, p_f, q_g, p_g


def _ring(grid: Grid3) -> np.ndarray:
    return grid.closure_mask & ~grid.omega_mask


def true_differences(c1: CoefficientPair, c2: CoefficientPair) -> Tuple[np.ndarray, np.ndarray]:
    phi1 = np.sqrt(c1.gamma) - np.sqrt(c2.gamma)
    phi2 = np.sqrt(c1.mu.astype(np.complex128)) - np.sqrt(c2.mu.astype(np.complex128))
    return phi1, phi2


def exact_discrete_fg(c1: CoefficientPair, c2: CoefficientPair) -> Tuple[np.ndarray, np.ndarray]:
    """f, g that the discrete system maps exactly to the true phi1, phi2 (Omega interior, zero elsewhere)."""
    grid = c1.grid
    phi1, phi2 = true_differences(c1, c2)
    q_f, p_f, q_g, p_g = elliptic_coefficients(c1, np.sqrt(c2.gamma), np.sqrt(c2.mu.astype(np.complex128)))
    f = (lap7_nodes(phi1, grid) + q_f * phi1 + p_f * phi2) / np.sqrt(c1.gamma)
    g = (lap7_nodes(phi2, grid) + q_g * phi2 + p_g * phi1) / np.sqrt(c1.mu)
    inner = grid.omega_mask
    return np.where(inner, f, 0.0), np.where(inner, g, 0.0)


def solve_coupled(f: np.ndarray, g: np.ndarray, c1: CoefficientPair, c2: CoefficientPair,
                  cfg: RecoveryConfig) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Picard iteration for (phi1, phi2). Face values come from the second pair;
    returns full-grid fields (zero off the closed cube) and the iteration count.
    """
    grid = c1.grid
    c1.grid.check_same(c2.grid)
    inner = grid.omega_mask
    ring = _ring(grid)
    g1 = np.sqrt(c1.gamma)
    m1 = np.sqrt(c1.mu.astype(np.complex128))
    phi1_true, phi2_true = true_differences(c1, c2)
    phi1_b = np.where(ring, phi1_true, 0.0)
    phi2_b = np.where(ring, phi2_true, 0.0)

    sqrt_gamma2 = np.sqrt(c2.gamma)
    sqrt_mu2 = np.sqrt(c2.mu.astype(np.complex128))
    sqrt_gamma2[inner] = g1[inner]
    sqrt_mu2[inner] = m1[inner]

    L = laplacian_7pt(2 * grid.m - 1, grid.h)
    size = L.shape[0]
    rhs = np.concatenate([
        g1[inner] * f[inner] - lap7_nodes(phi1_b, grid)[inner],
        m1[inner] * g[inner] - lap7_nodes(phi2_b, grid)[inner],
    ])
    rhs_norm = np.linalg.norm(rhs)
    phi = np.zeros(2 * size, dtype=np.complex128)

    for it in range(1, cfg.picard_max_iter + 1):
        q_f, p_f, q_g, p_g = (c[inner] for c in elliptic_coefficients(c1, sqrt_gamma2, sqrt_mu2))
        A = sp.bmat([
            [L + sp.diags(q_f), sp.diags(p_f)],
            [sp.diags(p_g), L + sp.diags(q_g)],
        ], format='csc')
        new = splu(A).solve(rhs)
        if rhs_norm > 0:
            residual = float(np.linalg.norm(A @ new - rhs) / rhs_norm)
            if residual > cfg.solve_tol:
                raise NoConvergence(f"Elliptic solve residual {residual:.3e}", iterations=it,
                                    residual=residual)
        change = float(np.linalg.norm(new - phi))
        phi = new
        sqrt_gamma2[inner] = g1[inner] - phi[:size]
        sqrt_mu2[inner] = m1[inner] - phi[size:]
        logger.debug(f"Picard step {it}: change {change:.3e}")
        if change <= cfg.picard_tol * np.linalg.norm(phi):
            break
    else:
        raise NoConvergence(f"Picard iteration did not settle in {cfg.picard_max_iter} steps",
                            iterations=cfg.picard_max_iter, residual=change)

    phi1 = phi1_b.astype(np.complex128)
    phi2 = phi2_b.astype(np.complex128)
    phi1[inner] = phi[:size]
    phi2[inner] = phi[size:]
    return phi1, phi2, it


def h1_norm(u: np.ndarray, grid: Grid3) -> float:
    """H^1 norm over the closed cube with trapezoid weights and second-order gradients."""
    idx = grid.closure_index
    uc = u[idx]
    w = grid.trapezoid_weights[idx]
    total = np.abs(uc) ** 2
    for d in np.gradient(uc, grid.h, edge_order=2):
        total = total + np.abs(d) ** 2
    return float(np.sqrt(np.sum(w * total)))


def _relative(error: np.ndarray, reference: np.ndarray, grid: Grid3) -> float:
    ref = h1_norm(reference, grid)
    err = h1_norm(error, grid)
    return err / ref if ref > 0 else err


@dataclass
class RecoveryReport:
    f: np.ndarray
    g: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    gamma2: np.ndarray
    mu2: np.ndarray
    h1_errors: Dict[str, float]
    picard_iterations: int = 0
    negative_mu_nodes: int = 0
    delta_c: Optional[float] = None
    curve_points: List[Tuple[float, float]] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'h1_errors': self.h1_errors,
            'picard_iterations': self.picard_iterations,
            'negative_mu_nodes': self.negative_mu_nodes,
            'delta_c': self.delta_c,
            'curve_points': self.curve_points,
            'diagnostics': self.diagnostics,
        }


def recover_from_fg(f: np.ndarray, g: np.ndarray, c1: CoefficientPair, c2: CoefficientPair,
                    cfg: RecoveryConfig, delta_c: Optional[float] = None,
                    diagnostics: Optional[Dict[str, Any]] = None) -> RecoveryReport:
    """Elliptic solve and reconstruction of the second pair, scored against its ground truth."""
    grid = c1.grid
    inner = grid.omega_mask
    phi1, phi2, iterations = solve_coupled(f, g, c1, c2, cfg)
    phi1_true, phi2_true = true_differences(c1, c2)

    gamma2 = c2.gamma.copy()
    gamma2[inner] = (np.sqrt(c1.gamma[inner]) - phi1[inner]) ** 2
    mu2_c = (np.sqrt(c1.mu[inner].astype(np.complex128)) - phi2[inner]) ** 2
    negative = int(np.sum(mu2_c.real <= 0))
    if negative:
        logger.warning(f"Recovered mu is non-positive at {negative} nodes; clamped for the report")
    mu2 = c2.mu.copy()
    mu2[inner] = np.maximum(mu2_c.real, 1.0 / c1.a_priori_M)

    h1_errors = {
        'phi1': _relative(phi1 - phi1_true, phi1_true, grid),
        'phi2': _relative(phi2 - phi2_true, phi2_true, grid),
        'gamma2': h1_norm(gamma2 - c2.gamma, grid),
        'mu2': h1_norm(mu2 - c2.mu, grid),
        'difference': h1_norm(c1.gamma - gamma2, grid) + h1_norm(c1.mu - mu2, grid),
        'difference_true': h1_norm(c1.gamma - c2.gamma, grid) + h1_norm(c1.mu - c2.mu, grid),
    }
    logger.info(f"Recovery: phi1 rel err {h1_errors['phi1']:.3e}, phi2 rel err "
                f"{h1_errors['phi2']:.3e} after {iterations} Picard steps")
    return RecoveryReport(f=f, g=g, phi1=phi1, phi2=phi2, gamma2=gamma2, mu2=mu2,
                          h1_errors=h1_errors, picard_iterations=iterations,
                          negative_mu_nodes=negative, delta_c=delta_c,
                          diagnostics=dict(diagnostics or {}))


def invert_and_solve(f_hat: FourierSamples, g_hat: FourierSamples, c1: CoefficientPair,
                     c2: CoefficientPair, cfg: RecoveryConfig,
                     delta_c: Optional[float] = None) -> RecoveryReport:
    """
    Inverse FFT of the truncated lattice samples, restriction to the closed
    cube, then the coupled elliptic solve.
    """
    grid = c1.grid
    f_full = f_hat.inverse()
    g_full = g_hat.inverse()
    diagnostics = {
        'rcut': f_hat.rcut,
        'modes': len(f_hat.values),
        'failed_modes': len(f_hat.failed),
        'interpolation': interpolation_check(f_full, grid, cfg.s1, cfg.s2),
        'tail': tail_check(f_full, grid, f_hat.rcut, cfg.s2),
    }
    f = np.where(grid.closure_mask, f_full, 0.0)
    g = np.where(grid.closure_mask, g_full, 0.0)
    return recover_from_fg(f, g, c1, c2, cfg, delta_c, diagnostics)


def write_recovery_report(report: RecoveryReport, out_dir, grid: Grid3) -> List[Path]:
    """report.json plus the f, g, phi1, phi2 scalar field files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [write_field(out_dir / f"{name}.cgof", grid, getattr(report, name), 'scalar')
             for name in ('f', 'g', 'phi1', 'phi2')]
    summary = out_dir / "report.json"
    write_json(summary, report.to_dict())
    paths.append(summary)
    return paths
