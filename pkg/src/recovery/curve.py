"""
Stability curve: for each perturbed pair, measure delta_C against the base
pair, choose tau = -log B(delta_C) / (2c), run the recovery pipeline and
fit error ~ C |log delta_C|^(-lambda).
"""

from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import csv
import logging

import numpy as np
from scipy.stats import spearmanr
from tqdm import tqdm

from src.coefficients.pair import CoefficientPair
from src.forward.cauchy import CauchySet, delta_C, generate_cauchy_set
from src.grid.grid import Grid3
from src.recovery.elliptic import invert_and_solve
from src.recovery.extraction import extract_fg_hat
from src.recovery.zeta import RecoveryConfig, make_zeta_pair, modulus_of_continuity
from src.utils.exceptions import NumericFailure

logger = logging.getLogger(__name__)

ZERO_DELTA = 1e-12
CSV_COLUMNS = ("delta_c", "h1_error", "tau", "lambda_fit")


def geometry_constant(grid: Grid3, k0_sq: float, taus: Sequence[float] = (4.0, 8.0, 16.0)) -> float:
    """
    c fitted from the amplification A(tau) = sup|exp(i zeta1.x)| sup|exp(i zeta2.x)|
    of the CGO phases sampled on the closed cube, log A(tau) ~ 2 c tau, for
    the smallest lattice mode along the first axis.
    """
    x = grid.coords[(slice(None),) + grid.closure_index]
    log_amp = []
    for tau in taus:
        zp = make_zeta_pair(grid.lattice_vector((1, 0, 0)), tau, k0_sq)
        amp = [np.abs(np.exp(1j * np.tensordot(z, x, axes=1))).max() for z in (zp.zeta1, zp.zeta2)]
        log_amp.append(np.log(amp[0]) + np.log(amp[1]))
    slope = np.polyfit(np.asarray(taus, dtype=float), log_amp, 1)[0]
    return float(slope / 2.0)


def tau_from_delta(delta: float, c: float, modulus: str = "identity",
                   tau_min: float = 1.0, tau_max: float = 50.0) -> float:
    """tau = -log B(delta) / (2c), clipped to [tau_min, tau_max]."""
    B = modulus_of_continuity(modulus)
    if delta <= 0:
        return tau_max
    tau = -np.log(B(min(delta, 1.0))) / (2.0 * c)
    return float(np.clip(tau, tau_min, tau_max))


@dataclass
class CurvePoint:
    label: str
    delta_c: float
    tau: float
    h1_error: float
    failed: bool = False


@dataclass
class StabilityCurve:
    points: List[CurvePoint]
    lambda_fit: float
    c_geometry: float
    spearman: float = float('nan')
    fit: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'points': [asdict(p) for p in self.points],
            'lambda_fit': self.lambda_fit,
            'c_geometry': self.c_geometry,
            'spearman': self.spearman,
            'fit': self.fit,
        }


def fit_lambda(deltas: Sequence[float], errors: Sequence[float]) -> Dict[str, float]:
    """Least-squares fit of log error = log C - lambda log|log delta| over usable points."""
    d = np.asarray(deltas, dtype=float)
    e = np.asarray(errors, dtype=float)
    keep = (d > ZERO_DELTA) & (d < 1.0) & (e > 0) & np.isfinite(e)
    if keep.sum() < 2:
        return {'lambda': float('nan'), 'log_C': float('nan'), 'points': int(keep.sum())}
    x = np.log(np.abs(np.log(d[keep])))
    y = np.log(e[keep])
    slope, intercept = np.polyfit(x, y, 1)
    return {'lambda': float(-slope), 'log_C': float(intercept), 'points': int(keep.sum())}


def amplitude_sweep(base_spec: Dict[str, Any], count: int = 8, low: float = 1e-3,
                    high: float = 3e-2, radius: Optional[float] = None,
                    target: str = 'gamma_bumps') -> List[Dict[str, Any]]:
    """
    Coefficient specs of the base plus one centred bump whose amplitude runs
    log-uniformly over [low, high] times the background value.
    """
    if count < 1 or not 0 < low <= high:
        raise ValueError(f"Bad sweep: count={count}, low={low}, high={high}")
    if target not in ('gamma_bumps', 'mu_bumps'):
        raise ValueError(f"Sweep target must be gamma_bumps or mu_bumps, got {target}")
    background = float(base_spec.get('eps0' if target == 'gamma_bumps' else 'mu0', 1.0))
    radius = radius if radius is not None else 0.5
    specs = []
    for amplitude in np.geomspace(low, high, count):
        spec = dict(base_spec)
        spec[target] = list(base_spec.get(target, [])) + [{
            'center': [0.0, 0.0, 0.0],
            'radius': radius,
            'amplitude_re': float(amplitude * background),
            'amplitude_im': 0.0,
        }]
        specs.append(spec)
    return specs


def stability_curve(base: CoefficientPair, perturbations: Sequence[CoefficientPair],
                    cfg: RecoveryConfig, probes: int = 48,
                    labels: Optional[Sequence[str]] = None,
                    c_geometry: Optional[float] = None,
                    tau_range=(1.0, 50.0),
                    base_set: Optional[CauchySet] = None,
                    show_progress: bool = False) -> StabilityCurve:
    """
    One curve point per perturbation: delta_C from the forward data, tau from
    delta_C, then extraction and elliptic recovery with the base pair as the
    first pair. Failed points are kept with NaN error and left out of the fit.
    """
    c = c_geometry or geometry_constant(base.grid, base.k0_sq)
    base_set = base_set or generate_cauchy_set(base, probes, cfg.threads)
    labels = list(labels or [f"p{i}" for i in range(len(perturbations))])

    points = []
    for label, pert in tqdm(list(zip(labels, perturbations)), desc="stability curve",
                            disable=not show_progress):
        delta = delta_C(base_set, generate_cauchy_set(pert, probes, cfg.threads))
        tau = tau_from_delta(delta, c, cfg.modulus, *tau_range)
        if delta <= ZERO_DELTA:
            points.append(CurvePoint(label, delta, tau, 0.0))
            continue
        try:
            run_cfg = cfg.with_tau(tau)
            f_hat, g_hat = extract_fg_hat(base, pert, run_cfg)
            report = invert_and_solve(f_hat, g_hat, base, pert, run_cfg, delta_c=delta)
            points.append(CurvePoint(label, delta, tau, report.h1_errors['difference']))
        except NumericFailure as e:
            logger.warning(f"Curve point {label} failed: {e}")
            points.append(CurvePoint(label, delta, tau, float('nan'), failed=True))
        logger.info(f"Curve point {label}: delta_C={delta:.3e}, tau={tau:.2f}, "
                    f"error={points[-1].h1_error:.3e}")

    fit = fit_lambda([p.delta_c for p in points], [p.h1_error for p in points])
    usable = [p for p in points if p.delta_c > ZERO_DELTA and np.isfinite(p.h1_error)]
    rho = (float(spearmanr([p.delta_c for p in usable], [p.h1_error for p in usable])[0])
           if len(usable) >= 3 else float('nan'))
    return StabilityCurve(points, fit['lambda'], c, rho, fit)


def write_curve_csv(curve: StabilityCurve, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for p in curve.points:
            writer.writerow([repr(float(v)) for v in (p.delta_c, p.h1_error, p.tau, curve.lambda_fit)])
    return path


def read_curve_csv(path) -> List[Dict[str, float]]:
    with open(path, 'r', newline='', encoding='utf-8') as f:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(f)]
