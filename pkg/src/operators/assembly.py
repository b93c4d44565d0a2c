"""
Pointwise matrix fields of the rescaled Maxwell system: W and its
transpose/conjugates, the zeroth-order potentials Q, Q', Q_hat, the augmented
potential V and the diagonal rescale maps.

All three potentials share one closed form. For a scalar k and curl-free
vector fields a, b (Da[r][c] = D_c a_r):

    diag blocks   f1: -(D.a) - k^2 - a.a        u1: -2 Da + (D.a - k^2 - a.a) I3
                  f2: -(D.b) - k^2 - b.b        u2: -2 Db + (D.b - k^2 - b.b) I3
    off-diagonal  -P[Dk] - P'[k (a + b)]

Q uses (kappa, D alpha/2, D beta/2); Q' uses (-kappa, -D beta/2, -D alpha/2);
Q_hat uses (conj kappa, -D beta/2, -D conj(alpha)/2).
"""

from dataclasses import dataclass
import logging

import numpy as np

from src.coefficients.pair import CoefficientPair, DerivedScalars
from src.grid.state import StateY, F1, F2, U1_IDX, U2_IDX
from src.operators.block_matrix import BlockMatrixField

logger = logging.getLogger(__name__)


def _pattern_m(grid, a: np.ndarray, b: np.ndarray) -> BlockMatrixField:
    """M(a, b) Z = (a.u2, a f2 + a x u2, b.u1, b f1 - b x u1)."""
    m = BlockMatrixField(grid)
    m.add_vector_row(F1, U2_IDX, a)
    m.add_vector_col(U1_IDX, F2, a)
    m.add_cross(U1_IDX, U2_IDX, a)
    m.add_vector_row(F2, U1_IDX, b)
    m.add_vector_col(U2_IDX, F1, b)
    m.add_cross(U2_IDX, U1_IDX, b, sign=-1.0)
    return m


@dataclass
class WFamily:
    W: BlockMatrixField
    Wt: BlockMatrixField
    W_bar: BlockMatrixField
    W_star: BlockMatrixField


def assemble_W(d: DerivedScalars) -> WFamily:
    """W = kappa I8 + M(D alpha / 2, D beta / 2) with its transpose, conjugate and adjoint."""
    W = _pattern_m(d.grid, d.a_vec, d.b_vec).plus_identity(d.kappa)
    Wt = W.transpose()
    return WFamily(W=W, Wt=Wt, W_bar=W.conj(), W_star=Wt.conj())


def generic_potential(grid, k: np.ndarray, a: np.ndarray, b: np.ndarray,
                      Da: np.ndarray, Db: np.ndarray, Dk: np.ndarray) -> BlockMatrixField:
    q = BlockMatrixField(grid)
    k2 = k * k
    for (scalar, vec_idx, vec, jac) in ((F1, U1_IDX, a, Da), (F2, U2_IDX, b, Db)):
        trace = jac[0][0] + jac[1][1] + jac[2][2]
        quad = np.sum(vec * vec, axis=0)
        q.add(scalar, scalar, -trace - k2 - quad)
        q.add_block(vec_idx, vec_idx, -2.0 * jac)
        for r in vec_idx:
            q.add(r, r, trace - k2 - quad)

    w = k * (a + b)
    # -P[Dk]
    q.add_vector_row(F1, U2_IDX, Dk, sign=-1.0)
    q.add_vector_col(U1_IDX, F2, Dk, sign=-1.0)
    q.add_cross(U1_IDX, U2_IDX, Dk, sign=1.0)
    q.add_vector_row(F2, U1_IDX, Dk, sign=-1.0)
    q.add_vector_col(U2_IDX, F1, Dk, sign=-1.0)
    q.add_cross(U2_IDX, U1_IDX, Dk, sign=-1.0)
    # -P'[k (a + b)]
    q.add_vector_row(F1, U2_IDX, w, sign=-1.0)
    q.add_vector_col(U1_IDX, F2, w, sign=-1.0)
    q.add_cross(U1_IDX, U2_IDX, w, sign=-1.0)
    q.add_vector_row(F2, U1_IDX, w, sign=-1.0)
    q.add_vector_col(U2_IDX, F1, w, sign=-1.0)
    q.add_cross(U2_IDX, U1_IDX, w, sign=1.0)
    return q


def _scaled_gradient(scale: float, grad_psi: np.ndarray, hess_psi: np.ndarray):
    """a = scale * D psi and its Jacobian D_c a_r = -scale * d_r d_c psi."""
    return -1j * scale * grad_psi, -scale * hess_psi


def assemble_Q(d: DerivedScalars) -> BlockMatrixField:
    """Q with (-Delta + Q) = (P + W)(P - Wt)."""
    a, Da = _scaled_gradient(0.5, d.grad_alpha, d.hess_alpha)
    b, Db = _scaled_gradient(0.5, d.grad_beta, d.hess_beta)
    return generic_potential(d.grid, d.kappa, a, b, Da, Db, -1j * d.grad_kappa)


def assemble_Q_prime(d: DerivedScalars) -> BlockMatrixField:
    """Q' with (-Delta + Q') = (P - Wt)(P + W)."""
    a, Da = _scaled_gradient(-0.5, d.grad_beta, d.hess_beta)
    b, Db = _scaled_gradient(-0.5, d.grad_alpha, d.hess_alpha)
    return generic_potential(d.grid, -d.kappa, a, b, Da, Db, 1j * d.grad_kappa)


def assemble_Q_hat(d: DerivedScalars) -> BlockMatrixField:
    """Q_hat with (-Delta + Q_hat) = (P + W*)(P - W_bar)."""
    a, Da = _scaled_gradient(-0.5, d.grad_beta, d.hess_beta)
    b, Db = _scaled_gradient(-0.5, np.conj(d.grad_alpha), np.conj(d.hess_alpha))
    return generic_potential(d.grid, np.conj(d.kappa), a, b, Da, Db,
                             -1j * np.conj(d.grad_kappa))


def assemble_V(c: CoefficientPair, d: DerivedScalars) -> BlockMatrixField:
    """
    Potential of the augmented system (P + V) X = 0 for X = (h, H, e, E):
    omega mu on the first half, omega gamma on the second, coupled by
    D alpha and D beta.
    """
    grid = c.grid
    v = BlockMatrixField(grid)
    for i in (F1,) + U1_IDX:
        v.add(i, i, c.omega * c.mu)
    for i in (F2,) + U2_IDX:
        v.add(i, i, c.omega * c.gamma)
    d_alpha = -1j * d.grad_alpha
    d_beta = -1j * d.grad_beta
    v.add_vector_row(F1, U2_IDX, d_alpha)
    v.add_vector_col(U1_IDX, F2, d_alpha)
    v.add_vector_row(F2, U1_IDX, d_beta)
    v.add_vector_col(U2_IDX, F1, d_beta)
    return v


def check_constant_coefficients(Q: BlockMatrixField, k0_sq: float, atol: float = 1e-12) -> bool:
    """True when Q + k0^2 I8 vanishes at every node."""
    return Q.plus_identity(k0_sq).max_abs() <= atol


class RescaleMaps:
    """
    Diagonal maps between the rescaled state Y and the physical X = (h, H, e, E):
    X = diag(mu^-1/2 I4, gamma^-1/2 I4) Y.
    """

    def __init__(self, c: CoefficientPair):
        self.grid = c.grid
        self._mu_half = np.sqrt(c.mu).astype(np.complex128)
        self._gamma_half = np.sqrt(c.gamma)

    def _diag(self, first: np.ndarray, second: np.ndarray) -> np.ndarray:
        out = np.empty((8,) + self.grid.shape, dtype=np.complex128)
        out[:4] = first
        out[4:] = second
        return out

    @property
    def to_physical(self) -> np.ndarray:
        return self._diag(1.0 / self._mu_half, 1.0 / self._gamma_half)

    @property
    def to_rescaled(self) -> np.ndarray:
        return self._diag(self._mu_half, self._gamma_half)

    @property
    def left(self) -> np.ndarray:
        """diag(gamma^-1/2 I4, mu^-1/2 I4), the left factor of the V relation."""
        return self._diag(1.0 / self._gamma_half, 1.0 / self._mu_half)

    def physical(self, Y: StateY) -> StateY:
        return StateY(Y.grid, self.to_physical * Y.data)

    def rescaled(self, X: StateY) -> StateY:
        return StateY(X.grid, self.to_rescaled * X.data)
