"""
The pairing <(Q1 - Q2) Z1, Y2>_Omega between a CGO solution for the first
pair at zeta1 and an adjoint CGO solution for the second pair at zeta2.

With zeta1 - conj(zeta2) = -xi the exponentials combine into exp(-i xi.x),
so the pairing approaches the Fourier transform of f (alpha polarization)
or g (beta polarization) over Omega as tau grows.
"""

from typing import Optional, Tuple

import numpy as np

from src.cgo.builders import build_adjoint_cgo, build_maxwell_cgo
from src.cgo.faddeev import FaddeevConfig
from src.coefficients.pair import CoefficientPair, DerivedScalars, derive_scalars
from src.grid.grid import Grid3
from src.grid.state import F1, F2
from src.operators.assembly import assemble_Q
from src.operators.block_matrix import BlockMatrixField
from src.recovery.zeta import RecoveryConfig, ZetaPair

ALPHA = "alpha"
BETA = "beta"
MODES = (ALPHA, BETA)


def polarizations(zp: ZetaPair, mode: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    (a1, b1, a_hat, b_hat) with the active polarization v1 = (-i eta1 + eta2)/sqrt(2)
    on the first solution and v2 = (i eta1 + eta2)/sqrt(2) on the adjoint one,
    so (i eta1 + eta2)/sqrt(2) . v1 = (i eta1 + eta2)/sqrt(2) . conj(v2) = 1.
    """
    v1 = (-1j * zp.eta1 + zp.eta2) / np.sqrt(2.0)
    v2 = (1j * zp.eta1 + zp.eta2) / np.sqrt(2.0)
    zero = np.zeros(3, dtype=np.complex128)
    if mode == ALPHA:
        return v1, zero, v2, zero
    if mode == BETA:
        return zero, v1, zero, v2
    raise ValueError(f"Unknown polarization mode: {mode}")


def q_difference(c1: CoefficientPair, c2: CoefficientPair,
                 d1: Optional[DerivedScalars] = None,
                 d2: Optional[DerivedScalars] = None) -> BlockMatrixField:
    c1.grid.check_same(c2.grid)
    if c1.omega != c2.omega:
        raise ValueError(f"Pairs at different frequencies: {c1.omega} vs {c2.omega}")
    Q1 = assemble_Q(d1 or derive_scalars(c1))
    Q2 = assemble_Q(d2 or derive_scalars(c2))
    return Q1 + Q2.scaled(-1.0)


def fourier_integral(values: np.ndarray, grid: Grid3, xi) -> complex:
    """int_Omega exp(-i xi.x) values dV with tensor trapezoid weights."""
    phase = np.exp(-1j * np.tensordot(np.asarray(xi, dtype=float), grid.coords, axes=1))
    return complex(np.sum(grid.trapezoid_weights * phase * values))


def f_field(dQ: BlockMatrixField) -> np.ndarray:
    """f = (Q1 - Q2) in the (f1, f1) slot."""
    return np.broadcast_to(dQ.entry(F1, F1), dQ.grid.shape).astype(np.complex128)


def g_field(dQ: BlockMatrixField) -> np.ndarray:
    """g = (Q1 - Q2) in the (f2, f2) slot."""
    return np.broadcast_to(dQ.entry(F2, F2), dQ.grid.shape).astype(np.complex128)


def oracle_hat(c1: CoefficientPair, c2: CoefficientPair, xi, mode: str = ALPHA,
               dQ: Optional[BlockMatrixField] = None) -> complex:
    """Direct quadrature of the Fourier transform of f or g at xi."""
    dQ = dQ or q_difference(c1, c2)
    values = f_field(dQ) if mode == ALPHA else g_field(dQ)
    return fourier_integral(values, c1.grid, xi)


def faddeev_config(zeta: np.ndarray, k0_sq: float, cfg: RecoveryConfig) -> FaddeevConfig:
    return FaddeevConfig(zeta=zeta, k0_sq=k0_sq, delta=cfg.delta, symbol_floor=cfg.symbol_floor)


def pairing_q_diff(c1: CoefficientPair, c2: CoefficientPair, zp: ZetaPair, mode: str = ALPHA,
                   cfg: Optional[RecoveryConfig] = None,
                   d1: Optional[DerivedScalars] = None,
                   d2: Optional[DerivedScalars] = None,
                   dQ: Optional[BlockMatrixField] = None) -> complex:
    """
    <(Q1 - Q2) Z1, Y2>_Omega with Z1 the CGO of the first pair at zeta1 and
    Y2 the adjoint CGO of the second pair at zeta2, by trapezoid quadrature
    of the envelopes.
    """
    cfg = cfg or RecoveryConfig(tau=zp.tau)
    d1 = d1 or derive_scalars(c1)
    d2 = d2 or derive_scalars(c2)
    dQ = dQ or q_difference(c1, c2, d1, d2)
    grid = c1.grid
    a1, b1, a_hat, b_hat = polarizations(zp, mode)

    sol1 = build_maxwell_cgo(c1, faddeev_config(zp.zeta1, c1.k0_sq, cfg), a1, b1,
                             d=d1, fixed_point=cfg.fixed_point)
    sol2 = build_adjoint_cgo(c2, faddeev_config(zp.zeta2, c2.k0_sq, cfg), a_hat, b_hat,
                             d=d2, fixed_point=cfg.fixed_point)

    integrand = np.sum(dQ.apply(sol1.Z_envelope) * np.conj(sol2.Y.total), axis=0)
    # exp(i zeta1.x) conj(exp(i zeta2.x)) = exp(i (zeta1 - conj zeta2).x)
    return fourier_integral(integrand, grid, -(zp.zeta1 - np.conj(zp.zeta2)).real)
