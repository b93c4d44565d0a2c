"""
CGO solutions Z = exp(i zeta.x)(L + R) of (-Delta + Q) Z = 0 and the
Maxwell / adjoint fields obtained from them:

    Y     = (P - Wt) Z     solves (P + W) Y = 0,
    Y_hat = (P - W_bar) Z  solves (P + W*) Y_hat = 0  (with Q_hat in place of Q).

Every field is stored as its envelope exp(-i zeta.x) * field. Envelopes
mix two classes: terms built from the constant principal part are periodic
and terms built from R carry the Faddeev lattice shift. The two parts are
kept apart so spectral derivatives stay exact on each.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional
import logging

import numpy as np

from src.cgo.faddeev import FaddeevConfig
from src.cgo.remainder import FixedPointReport, solve_remainder
from src.coefficients.pair import CoefficientPair, DerivedScalars, derive_scalars
from src.grid import calculus
from src.grid.field_io import write_field
from src.grid.state import StateY, broadcast_vector, field_norm_omega, sup_omega, weighted_norm
from src.operators.assembly import RescaleMaps, assemble_Q, assemble_Q_hat, assemble_W
from src.operators.block_matrix import BlockMatrixField, pattern_apply
from src.operators.dirac import apply_P_array, envelope_schrodinger
from src.utils.helpers import write_json

logger = logging.getLogger(__name__)

SCHRODINGER = "schrodinger"
ADJOINT = "adjoint"


def zeta_modulus(zeta: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(zeta) ** 2)))


def maxwell_principal(zeta: np.ndarray, a: np.ndarray, b: np.ndarray, k0: float) -> np.ndarray:
    """L = (zeta.a, k0 b, zeta.b, k0 a) / |zeta|."""
    zeta = np.asarray(zeta, dtype=np.complex128)
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    L = np.concatenate([[np.dot(zeta, a)], k0 * b, [np.dot(zeta, b)], k0 * a])
    return L / zeta_modulus(zeta)


def adjoint_principal(zeta: np.ndarray, a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
    """L_hat = (0, b_hat, 0, a_hat) / |zeta|."""
    a_hat = np.asarray(a_hat, dtype=np.complex128)
    b_hat = np.asarray(b_hat, dtype=np.complex128)
    return np.concatenate([[0.0], b_hat, [0.0], a_hat]) / zeta_modulus(zeta)


def adjoint_leading(zeta: np.ndarray, a_hat: np.ndarray, b_hat: np.ndarray) -> np.ndarray:
    """M = P[zeta] L_hat = (zeta.a_hat, -zeta x a_hat, zeta.b_hat, zeta x b_hat) / |zeta|."""
    L_hat = adjoint_principal(zeta, a_hat, b_hat)
    return pattern_apply(np.asarray(zeta, dtype=np.complex128), L_hat.reshape(8, 1))[:, 0]


@dataclass
class SplitField:
    """Envelope = periodic part + part in the shifted lattice class."""
    periodic: np.ndarray
    shifted: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.periodic + self.shifted

    def scaled(self, factor: np.ndarray) -> "SplitField":
        return SplitField(self.periodic * factor, self.shifted * factor)


def _split_curl(u: SplitField, grid, shift) -> np.ndarray:
    return calculus.curl(u.periodic, grid) + calculus.curl(u.shifted, grid, shift=shift)


def _split_P(u: SplitField, grid, shift) -> np.ndarray:
    return apply_P_array(u.periodic, grid) + apply_P_array(u.shifted, grid, shift=shift)


@dataclass
class CGOSolution:
    zeta: np.ndarray
    kind: str
    a: np.ndarray
    b: np.ndarray
    principal: np.ndarray
    R: StateY
    Y: SplitField
    shift: Optional[np.ndarray]
    report: FixedPointReport
    leading: Optional[np.ndarray] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def grid(self):
        return self.R.grid

    @property
    def Z_envelope(self) -> np.ndarray:
        """L + R on the nodes."""
        return broadcast_vector(self.principal) + self.R.data

    @property
    def S(self) -> np.ndarray:
        """Y envelope minus its constant leading term (adjoint kind)."""
        if self.leading is None:
            raise ValueError("S is defined for adjoint solutions only")
        return self.Y.total - broadcast_vector(self.leading)

    def phase(self) -> np.ndarray:
        return np.exp(1j * np.tensordot(self.zeta, self.grid.coords, axes=1))

    def Z_field(self) -> StateY:
        return StateY(self.grid, self.phase() * self.Z_envelope)

    def Y_field(self) -> StateY:
        return StateY(self.grid, self.phase() * self.Y.total)


def _principal_split(principal: np.ndarray, R: StateY) -> SplitField:
    grid = R.grid
    L_field = np.broadcast_to(broadcast_vector(principal), (8,) + grid.shape).astype(np.complex128)
    return SplitField(L_field, R.data)


def _y_envelope(zeta: np.ndarray, Z: SplitField, M: BlockMatrixField, grid, shift) -> SplitField:
    """exp(-i zeta.x) (P - M) exp(i zeta.x) Z = P[zeta] Z + P Z - M Z, split by class."""
    periodic = pattern_apply(zeta, Z.periodic) - M.apply(Z.periodic)
    shifted = (pattern_apply(zeta, Z.shifted) + apply_P_array(Z.shifted, grid, shift=shift)
               - M.apply(Z.shifted))
    return SplitField(periodic, shifted)


def _schrodinger_residual(Q: BlockMatrixField, zeta: np.ndarray, Z: SplitField, grid, shift) -> float:
    res = (envelope_schrodinger(Q, zeta, Z.shifted, grid, shift)
           + envelope_schrodinger(Q, zeta, Z.periodic, grid))
    denom = field_norm_omega(Z.total, grid)
    return field_norm_omega(res, grid) / denom if denom else 0.0


def build_maxwell_cgo(c: CoefficientPair, cfg: FaddeevConfig, a, b,
                      d: Optional[DerivedScalars] = None,
                      fixed_point: Optional[Dict[str, Any]] = None) -> CGOSolution:
    """
    Schrodinger CGO for Q, the Maxwell field Y = (P - Wt) Z and the physical
    (h, H, e, E) through the rescale maps, with residual diagnostics.
    """
    grid = c.grid
    d = d or derive_scalars(c)
    zeta = cfg.zeta
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    Q = assemble_Q(d)
    family = assemble_W(d)
    principal = maxwell_principal(zeta, a, b, c.k0)
    R, report = solve_remainder(Q, cfg, principal, **(fixed_point or {}))
    shift = cfg.shift(grid)

    Z = _principal_split(principal, R)
    Y = _y_envelope(zeta, Z, family.Wt, grid, shift)

    rescale = RescaleMaps(c)
    X = Y.scaled(rescale.to_physical)
    H = SplitField(X.periodic[1:4], X.shifted[1:4])
    E = SplitField(X.periodic[5:8], X.shifted[5:8])
    Ht, Et = H.total, E.total
    zeta_b = zeta.reshape(3, 1, 1, 1)
    res_h = 1j * np.cross(zeta_b, Ht, axis=0) + _split_curl(H, grid, shift) + 1j * c.omega * c.gamma * Et
    res_e = 1j * np.cross(zeta_b, Et, axis=0) + _split_curl(E, grid, shift) - 1j * c.omega * c.mu * Ht
    scale = zeta_modulus(zeta) * (field_norm_omega(Ht, grid) + field_norm_omega(Et, grid))
    maxwell_residual = ((field_norm_omega(res_h, grid) + field_norm_omega(res_e, grid)) / scale
                        if scale else 0.0)

    Xt = X.total
    diagnostics = {
        'zeta_norm': zeta_modulus(zeta),
        'remainder_weighted_norm': weighted_norm(R, cfg.delta),
        'residual_norm': _schrodinger_residual(Q, zeta, Z, grid, shift),
        'maxwell_residual': float(maxwell_residual),
        'eh_sup_norm': sup_omega(Xt[0], grid) + sup_omega(Xt[4], grid),
        'fixed_point_iterations': report.iterations,
        'contraction': report.contraction,
        'floored_modes': report.floored_modes,
    }
    logger.debug(f"Maxwell CGO |zeta|={diagnostics['zeta_norm']:.3g}: {diagnostics}")
    return CGOSolution(zeta=zeta, kind=SCHRODINGER, a=a, b=b, principal=principal, R=R,
                       Y=Y, shift=shift, report=report, diagnostics=diagnostics)


def physical_fields(sol: CGOSolution, c: CoefficientPair) -> Dict[str, np.ndarray]:
    """Envelopes of h, H, e, E for a Schrodinger-kind solution."""
    X = RescaleMaps(c).to_physical * sol.Y.total
    return {'h': X[0], 'H': X[1:4], 'e': X[4], 'E': X[5:8]}


def build_adjoint_cgo(c: CoefficientPair, cfg: FaddeevConfig, a_hat, b_hat,
                      d: Optional[DerivedScalars] = None,
                      fixed_point: Optional[Dict[str, Any]] = None) -> CGOSolution:
    """
    Schrodinger CGO for Q_hat and Y_hat = (P - W_bar) Z_hat = exp(i zeta.x)(M + S).
    """
    grid = c.grid
    d = d or derive_scalars(c)
    zeta = cfg.zeta
    a_hat = np.asarray(a_hat, dtype=np.complex128)
    b_hat = np.asarray(b_hat, dtype=np.complex128)
    Q_hat = assemble_Q_hat(d)
    family = assemble_W(d)
    principal = adjoint_principal(zeta, a_hat, b_hat)
    leading = adjoint_leading(zeta, a_hat, b_hat)
    R, report = solve_remainder(Q_hat, cfg, principal, **(fixed_point or {}))
    shift = cfg.shift(grid)

    Z = _principal_split(principal, R)
    Y = _y_envelope(zeta, Z, family.W_bar, grid, shift)

    # (P + W*) Y_hat, enveloped
    adj = pattern_apply(zeta, Y.total) + _split_P(Y, grid, shift) + family.W_star.apply(Y.total)
    y_norm = field_norm_omega(Y.total, grid)
    S = Y.total - broadcast_vector(leading)
    diagnostics = {
        'zeta_norm': zeta_modulus(zeta),
        'remainder_weighted_norm': weighted_norm(R, cfg.delta),
        'residual_norm': _schrodinger_residual(Q_hat, zeta, Z, grid, shift),
        'adjoint_residual': (field_norm_omega(adj, grid) / (zeta_modulus(zeta) * y_norm)
                             if y_norm else 0.0),
        's_norm': field_norm_omega(S, grid),
        'fixed_point_iterations': report.iterations,
        'contraction': report.contraction,
        'floored_modes': report.floored_modes,
    }
    return CGOSolution(zeta=zeta, kind=ADJOINT, a=a_hat, b=b_hat, principal=principal, R=R,
                       Y=Y, shift=shift, report=report, leading=leading, diagnostics=diagnostics)


def write_cgo_dump(sol: CGOSolution, out_dir) -> Dict[str, Path]:
    """Z and Y envelopes as state8 field files plus diagnostics JSON."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        'Z': write_field(out_dir / 'Z_envelope.cgof', sol.grid, sol.Z_envelope, 'state8'),
        'Y': write_field(out_dir / 'Y_envelope.cgof', sol.grid, sol.Y.total, 'state8'),
    }
    meta = {
        'kind': sol.kind,
        'zeta_re': sol.zeta.real.tolist(),
        'zeta_im': sol.zeta.imag.tolist(),
        'polarization_a': [[z.real, z.imag] for z in sol.a],
        'polarization_b': [[z.real, z.imag] for z in sol.b],
        'diagnostics': sol.diagnostics,
        'fixed_point': sol.report.to_dict(),
    }
    paths['diagnostics'] = out_dir / 'cgo.json'
    write_json(paths['diagnostics'], meta)
    return paths
