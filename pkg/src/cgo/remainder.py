"""
Damped fixed-point solve of R = -G_zeta (Q + k0^2 I8)(L + R).
"""

from dataclasses import dataclass, field, asdict
from typing import List
import logging

import numpy as np

from src.cgo.faddeev import FaddeevConfig, gzeta_apply
from src.grid.state import StateY, broadcast_vector
from src.operators.block_matrix import BlockMatrixField
from src.utils.exceptions import NoConvergence, NonContractive

logger = logging.getLogger(__name__)


@dataclass
class FixedPointReport:
    iterations: int = 0
    final_update: float = 0.0
    contraction: float = 0.0
    floored_modes: int = 0
    updates: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _box_norm(values: np.ndarray, cell_volume: float) -> float:
    return float(np.sqrt(cell_volume * np.sum(np.abs(values) ** 2)))


def solve_remainder(Q: BlockMatrixField, cfg: FaddeevConfig, L: np.ndarray,
                    theta: float = 1.0, tol: float = 1e-10, max_iter: int = 200):
    """
    Iterate R <- (1 - theta) R + theta * (-G_zeta V (L + R)) with V = Q + k0^2 I8.

    Stops when the update falls below tol * (||R|| + ||L||). Raises
    NonContractive once the mean contraction rate reaches 1 and NoConvergence
    when the budget runs out. Returns (R, FixedPointReport).
    """
    if not 0 < theta <= 1:
        raise ValueError(f"Damping theta must lie in (0, 1], got {theta}")
    grid = Q.grid
    V = Q.plus_identity(cfg.k0_sq)
    L_field = np.broadcast_to(broadcast_vector(L), (8,) + grid.shape)
    L_norm = _box_norm(L_field, grid.cell_volume)

    R = np.zeros((8,) + grid.shape, dtype=np.complex128)
    report = FixedPointReport()
    first_update = None

    for it in range(1, max_iter + 1):
        source = V.apply(L_field + R)
        image, floored = gzeta_apply(cfg, source, grid)
        R_new = (1.0 - theta) * R - theta * image
        update = _box_norm(R_new - R, grid.cell_volume)
        R = R_new

        report.iterations = it
        report.final_update = update
        report.floored_modes = floored
        report.updates.append(update)

        if update <= tol * (_box_norm(R, grid.cell_volume) + L_norm):
            logger.debug(f"Remainder converged in {it} iterations (update {update:.3e})")
            return StateY(grid, R), report

        if first_update is None:
            first_update = update
        elif it >= 3:
            rate = (update / first_update) ** (1.0 / (it - 1))
            report.contraction = float(rate)
            if rate >= 1.0:
                raise NonContractive(
                    f"Fixed-point map not contractive at |zeta|={cfg.zeta_norm:.3g} "
                    f"(mean rate {rate:.3f})",
                    factor=float(rate),
                )

    raise NoConvergence(
        f"Remainder not converged after {max_iter} iterations at |zeta|={cfg.zeta_norm:.3g}",
        iterations=max_iter,
        residual=report.final_update,
    )
