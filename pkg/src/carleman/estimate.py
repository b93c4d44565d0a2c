"""
Numerical check of the Carleman estimate with weight exp(phi/h), phi = |x - x0|^2 / 2:

    h ||e^{phi/h} u||^2 + h^3 ||e^{phi/h} grad u||^2
        <= C (h^4 ||e^{phi/h} Lap u||^2 + h ||e^{phi/h} u||^2_bd + h^3 ||e^{phi/h} grad u||^2_bd).

All weighted integrals carry a common factor exp(-shift) with
shift = 2 max(phi) / h once that exponent gets large, so ratios are exact.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import csv
import logging

import numpy as np
from scipy.integrate import trapezoid

from src.coefficients.pair import Bump, CoefficientPair
from src.forward.boundary import FACES, face_values
from src.grid.grid import Grid3
from src.utils.exceptions import ConfigError
from src.utils.helpers import make_rng

logger = logging.getLogger(__name__)

EXPONENT_GUARD = 600.0
CSV_COLUMNS = ("h", "lhs", "rhs", "ratio")


@dataclass
class CarlemanConfig:
    grid: Grid3
    x0: Optional[Sequence[float]] = None
    h_values: Sequence[float] = (0.05, 0.1, 0.2, 0.3)

    def __post_init__(self):
        a = self.grid.a
        self.x0 = np.asarray(self.x0 if self.x0 is not None else (3.0 * a, 0.0, 0.0), dtype=float)
        if self.x0.shape != (3,):
            raise ConfigError(f"x0 must be a 3-vector, got {self.x0.tolist()}")
        if np.all(np.abs(self.x0) <= max(a, self.grid.face_half_width)):
            raise ConfigError(f"x0 = {self.x0.tolist()} lies in the closed cube")
        for h in self.h_values:
            if not 0 < h <= 1:
                raise ConfigError(f"h values must lie in (0, 1], got {h}")
        phi = self.weight()[self.grid.omega_mask]
        self.d1 = float(phi.min())
        self.d2 = float(phi.max())

    def weight(self) -> np.ndarray:
        """phi(x) = |x - x0|^2 / 2 on the nodes."""
        diff = self.grid.coords - self.x0.reshape(3, 1, 1, 1)
        return 0.5 * np.sum(diff ** 2, axis=0)

    def shift(self, h: float) -> float:
        top = 2.0 * self.d2 / h
        return top if top > EXPONENT_GUARD else 0.0


@dataclass
class CarlemanResult:
    h: float
    lhs: float
    rhs: float
    ratio: float
    log_shift: float = 0.0
    terms: Dict[str, float] = field(default_factory=dict)


def _closure_derivatives(u: np.ndarray, grid: Grid3):
    uc = u[grid.closure_index]
    grads = np.gradient(uc, grid.h, edge_order=2)
    lap = sum(np.gradient(grads[j], grid.h, axis=j, edge_order=2) for j in range(3))
    return uc, np.array(grads), lap


def _boundary_integral(values: np.ndarray, grid: Grid3) -> float:
    """Sum over the six faces of the 2-D trapezoid integral of a closure node field."""
    total = 0.0
    axis_pts = grid.axis[grid.closure_slice]
    for axis, side in FACES:
        face = face_values(values, grid, axis, side)
        total += trapezoid(trapezoid(face, axis_pts, axis=-1), axis_pts, axis=-1)
    return float(total)


def weighted_terms(u: np.ndarray, cfg: CarlemanConfig, h: float,
                   weighted: bool = True) -> Dict[str, float]:
    """The five weighted squared norms, each scaled by exp(-shift); plain norms when not weighted."""
    grid = cfg.grid
    shift = cfg.shift(h) if weighted else 0.0
    w2 = np.exp(2.0 * cfg.weight()[grid.closure_index] / h - shift) if weighted else 1.0
    uc, grads, lap = _closure_derivatives(u, grid)
    vol = grid.trapezoid_weights[grid.closure_index]
    grad_sq = np.sum(np.abs(grads) ** 2, axis=0)
    return {
        'u': float(np.sum(vol * w2 * np.abs(uc) ** 2)),
        'grad': float(np.sum(vol * w2 * grad_sq)),
        'lap': float(np.sum(vol * w2 * np.abs(lap) ** 2)),
        'u_boundary': _boundary_integral(w2 * np.abs(uc) ** 2, grid),
        'grad_boundary': _boundary_integral(w2 * grad_sq, grid),
        'shift': shift,
    }


def carleman_ratio(u: np.ndarray, cfg: CarlemanConfig, h: float) -> CarlemanResult:
    """lhs, rhs and lhs / rhs for one h; u = 0 reports ratio 0."""
    t = weighted_terms(u, cfg, h)
    lhs = h * t['u'] + h ** 3 * t['grad']
    rhs = h ** 4 * t['lap'] + h * t['u_boundary'] + h ** 3 * t['grad_boundary']
    ratio = lhs / rhs if rhs > 0 else 0.0
    return CarlemanResult(h, lhs, rhs, ratio, t['shift'], t)


def carleman_sweep(u: np.ndarray, cfg: CarlemanConfig, threads: int = 1) -> List[CarlemanResult]:
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        return list(executor.map(lambda h: carleman_ratio(u, cfg, h), cfg.h_values))


def weight_bounds_hold(cfg: CarlemanConfig, h: float) -> bool:
    """exp(d1/h) <= exp(phi/h) <= exp(d2/h) on Omega, compared in the exponent."""
    phi = cfg.weight()[cfg.grid.omega_mask] / h
    return bool(np.all(phi >= cfg.d1 / h) and np.all(phi <= cfg.d2 / h))


def random_test_functions(grid: Grid3, count: int, seed: Optional[int] = 0) -> List[np.ndarray]:
    """Smooth bumps supported strictly inside the cube."""
    rng = make_rng(seed)
    a = min(grid.a, grid.face_half_width)
    out = []
    for _ in range(count):
        radius = rng.uniform(0.3 * a, 0.6 * a)
        center = rng.uniform(-(a - radius) * 0.9, (a - radius) * 0.9, size=3)
        amplitude = complex(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        out.append(Bump(center, radius, amplitude).evaluate(grid.coords))
    return out


def fit_constant(results: Sequence[CarlemanResult]) -> Dict[str, float]:
    ratios = np.array([r.ratio for r in results if r.rhs > 0])
    if ratios.size == 0:
        return {'C': 0.0, 'median': 0.0, 'spread': 0.0}
    median = float(np.median(ratios))
    return {
        'C': float(ratios.max()),
        'median': median,
        'spread': float(ratios.max() / median) if median > 0 else float('inf'),
    }


@dataclass
class AbsorbReport:
    h_values: List[float]
    lhs: List[float]
    rhs: List[float]
    ratios: List[float]
    log_margins: List[float]
    C_fit: float
    h_threshold: float
    boundary_terms: List[float]
    modulus_bound: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def absorb_check(phi1: np.ndarray, phi2: np.ndarray, f: np.ndarray, g: np.ndarray,
                 c1: CoefficientPair, c2: CoefficientPair, cfg: CarlemanConfig,
                 delta_c: Optional[float] = None) -> AbsorbReport:
    """
    Both sides of the absorbed estimate

        sum_j h ||w phi_j||^2 + h^3 ||w grad phi_j||^2
            <= C (h^4 ||w gamma1^(1/2) f||^2 + h^4 ||w mu1^(1/2) g||^2 + boundary terms of phi_j)

    per h, the fitted C'' (largest lhs/rhs) and the threshold C''^(-1/3).
    Margins are log(C'' exp(2 d2/h) rhs_plain) - log(exp(2 d1/h) lhs_plain)
    for the unweighted sides; nonnegative whenever the weighted form holds.
    """
    c1.grid.check_same(c2.grid)
    lhs, rhs, ratios, margins, boundary = [], [], [], [], []
    plain = []
    sf = np.sqrt(c1.gamma) * f
    sg = np.sqrt(c1.mu) * g

    def sides(h: float, weighted: bool):
        t1 = weighted_terms(phi1, cfg, h, weighted)
        t2 = weighted_terms(phi2, cfg, h, weighted)
        tf = weighted_terms(sf, cfg, h, weighted)
        tg = weighted_terms(sg, cfg, h, weighted)
        left = h * (t1['u'] + t2['u']) + h ** 3 * (t1['grad'] + t2['grad'])
        bnd = (h * (t1['u_boundary'] + t2['u_boundary'])
               + h ** 3 * (t1['grad_boundary'] + t2['grad_boundary']))
        return left, h ** 4 * (tf['u'] + tg['u']) + bnd, bnd

    for h in cfg.h_values:
        left, right, bnd = sides(h, True)
        lhs.append(left)
        rhs.append(right)
        ratios.append(left / right if right > 0 else 0.0)
        plain_left, plain_right, plain_bnd = sides(h, False)
        plain.append((plain_left, plain_right))
        boundary.append(plain_bnd)

    C_fit = max(ratios, default=0.0)
    for h, (left, right) in zip(cfg.h_values, plain):
        if left <= 0 or right <= 0:
            margins.append(0.0)
            continue
        margins.append(float(np.log(C_fit * right) + 2.0 * cfg.d2 / h
                             - np.log(left) - 2.0 * cfg.d1 / h))

    # boundary data of the pipeline are controlled by B(delta_C), B = identity
    modulus_bound = float(delta_c) if delta_c is not None else None
    threshold = C_fit ** (-1.0 / 3.0) if C_fit > 0 else float('inf')
    logger.info(f"Absorbed estimate: C''={C_fit:.3e}, holds for h < {threshold:.3g}")
    return AbsorbReport(list(cfg.h_values), lhs, rhs, ratios, margins, C_fit, threshold,
                        boundary, modulus_bound)


def write_carleman_csv(results: Sequence[CarlemanResult], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow([repr(float(v)) for v in (r.h, r.lhs, r.rhs, r.ratio)])
    return path
