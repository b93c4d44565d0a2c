"""
Cauchy data sets {(N x E, N x H)} generated from plane-wave probes, their
on-disk layout, the pseudo-distance delta_C and the admittance-difference norm.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np
from scipy.linalg import qr, solve_triangular
from tqdm import tqdm

from src.coefficients.pair import CoefficientPair
from src.forward.boundary import BoundaryField, TANGENTIAL, closure_values, tangential_trace
from src.forward.solver import MaxwellForwardSolver
from src.forward.th_norm import th_features
from src.grid.field_io import read_field, write_field
from src.grid.grid import Grid3
from src.utils.exceptions import ConfigError, GridMismatch
from src.utils.helpers import make_rng, read_json, write_json

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-12
NORMALIZE_T = "T"
NORMALIZE_TS = "TS"


def fibonacci_directions(count: int) -> np.ndarray:
    """Deterministic, nearly uniform unit vectors (count, 3)."""
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(1.0 - z ** 2)
    phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(count)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def transverse_frame(d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Two unit vectors orthogonal to d and to each other."""
    e = np.zeros(3)
    e[int(np.argmin(np.abs(d)))] = 1.0
    p1 = np.cross(d, e)
    p1 /= np.linalg.norm(p1)
    p2 = np.cross(d, p1)
    return p1, p2 / np.linalg.norm(p2)


@dataclass
class PlaneWave:
    direction: np.ndarray
    polarization: np.ndarray
    k0: float

    def electric(self, grid: Grid3) -> np.ndarray:
        """E = p exp(i k0 d.x) on the closed cube."""
        x = closure_values(grid.coords, grid)
        phase = np.exp(1j * self.k0 * np.tensordot(self.direction, x, axes=1))
        return self.polarization.reshape(3, 1, 1, 1) * phase

    def magnetic(self, grid: Grid3, omega: float, mu0: float) -> np.ndarray:
        """H = (k x p) exp(i k.x) / (omega mu0) in the constant background."""
        x = closure_values(grid.coords, grid)
        phase = np.exp(1j * self.k0 * np.tensordot(self.direction, x, axes=1))
        kxp = self.k0 * np.cross(self.direction, self.polarization)
        return kxp.reshape(3, 1, 1, 1) * phase / (omega * mu0)


def plane_wave_probes(count: int, k0: float) -> List[PlaneWave]:
    """count/2 Fibonacci directions times two transverse polarizations."""
    if count < 2 or count % 2:
        raise ConfigError(f"Probe count must be an even number >= 2, got {count}")
    probes = []
    for d in fibonacci_directions(count // 2):
        for p in transverse_frame(d):
            probes.append(PlaneWave(d, p, k0))
    return probes


@dataclass
class CauchyDatum:
    T: BoundaryField
    S: BoundaryField


@dataclass
class CauchySet:
    grid: Grid3
    omega: float
    data: List[CauchyDatum]
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.data)

    def scaled(self, factor: complex) -> "CauchySet":
        return CauchySet(self.grid, self.omega,
                         [CauchyDatum(d.T.scaled(factor), d.S.scaled(factor)) for d in self.data],
                         dict(self.provenance))

    def features(self) -> Tuple[np.ndarray, np.ndarray]:
        """Columns of TH features for T and S."""
        T = np.stack([th_features(d.T) for d in self.data], axis=1)
        S = np.stack([th_features(d.S) for d in self.data], axis=1)
        return T, S


def generate_cauchy_set(c: CoefficientPair, probes: int = 48, threads: int = 1,
                        provenance: Optional[Dict[str, Any]] = None,
                        show_progress: bool = False) -> CauchySet:
    """
    Forward-solve every plane-wave probe trace for the pair c. The edge
    system is factorized once and all probes share one batched triangular
    solve; the threads then rebuild the node fields and admittance traces of
    distinct probes concurrently. Results keep the probe order.
    """
    solver = MaxwellForwardSolver(c)
    solver.factorize()
    waves = plane_wave_probes(probes, c.k0)
    traces = [tangential_trace(w.electric(c.grid), c.grid) for w in waves]
    e_b, e_i, residuals = solver.interior_solve(traces)

    def run(i: int) -> CauchyDatum:
        sol = solver.solution_from_edges(e_b[:, i], e_i[:, i], residuals[i])
        return CauchyDatum(traces[i], tangential_trace(sol.H, c.grid))

    data: List[Optional[CauchyDatum]] = [None] * len(waves)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        futures = {executor.submit(run, i): i for i in range(len(waves))}
        for future in tqdm(futures, total=len(futures), desc="forward probes",
                           disable=not show_progress):
            data[futures[future]] = future.result()

    logger.info(f"Cauchy set: {len(data)} data, condition indicator {solver.condition:.3e}")
    prov = dict(provenance or {})
    prov.setdefault('probes', probes)
    prov.setdefault('condition', solver.condition)
    return CauchySet(c.grid, c.omega, data, prov)


def write_cauchy_set(cs: CauchySet, directory) -> List[Path]:
    """cauchy.json plus one tangential field file per T and S."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    paths = []
    for i, datum in enumerate(cs.data):
        t_path = write_field(directory / f"T_{i:03d}.cgof", cs.grid, datum.T.data, TANGENTIAL)
        s_path = write_field(directory / f"S_{i:03d}.cgof", cs.grid, datum.S.data, TANGENTIAL)
        files.append({'T': t_path.name, 'S': s_path.name})
        paths.extend([t_path, s_path])
    manifest = directory / "cauchy.json"
    write_json(manifest, {
        'grid': cs.grid.describe(),
        'omega': cs.omega,
        'provenance': cs.provenance,
        'data': files,
    })
    paths.append(manifest)
    return paths


def read_cauchy_set(directory) -> CauchySet:
    directory = Path(directory)
    meta = read_json(directory / "cauchy.json")
    g = meta['grid']
    grid = Grid3(int(g['n']), float(g['L']), float(g['a']))
    data = []
    for entry in meta['data']:
        parts = {}
        for key in ('T', 'S'):
            fgrid, values, kind = read_field(directory / entry[key])
            if fgrid != grid or kind != TANGENTIAL:
                raise ConfigError(f"{entry[key]} does not match the Cauchy set grid")
            parts[key] = BoundaryField(grid, values, TANGENTIAL)
        data.append(CauchyDatum(parts['T'], parts['S']))
    return CauchySet(grid, float(meta['omega']), data, meta.get('provenance', {}))


def _check_compatible(c1: CauchySet, c2: CauchySet):
    if c1.grid != c2.grid:
        raise GridMismatch("Cauchy sets live on different boundary grids")
    if c1.omega != c2.omega:
        raise ValueError(f"Cauchy sets sampled at different frequencies: {c1.omega} vs {c2.omega}")


def span_basis(A: np.ndarray, tol: float = RANK_TOLERANCE) -> Tuple[np.ndarray, int]:
    """Orthonormal basis of the column span by pivoted QR, dropping |R_ii| < tol |R_00|."""
    Q, R, _ = qr(A, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0:
        return Q[:, :0], 0
    rank = int(np.sum(diag >= tol * diag[0]))
    return Q[:, :rank], rank


def _directed_distance(source: CauchySet, target: CauchySet, normalize: str) -> Tuple[float, int]:
    """sup over the data of target of the distance to span(source)."""
    T_src, S_src = source.features()
    basis, rank = span_basis(np.vstack([T_src, S_src]))
    if rank < len(source):
        logger.debug(f"Cauchy span rank {rank} of {len(source)} samples")
    T_tgt, S_tgt = target.features()
    V = np.vstack([T_tgt, S_tgt])
    residual = V - basis @ (basis.conj().T @ V)
    if normalize == NORMALIZE_T:
        scale = np.linalg.norm(T_tgt, axis=0)
    elif normalize == NORMALIZE_TS:
        scale = np.linalg.norm(V, axis=0)
    else:
        raise ValueError(f"Unknown normalization: {normalize}")
    dist = np.linalg.norm(residual, axis=0)
    keep = scale > 0
    return float(np.max(dist[keep] / scale[keep])) if keep.any() else 0.0, rank


def delta_C(c1: CauchySet, c2: CauchySet, normalize: str = NORMALIZE_T) -> float:
    """
    max over both orderings of sup_{(T,S) in C_k, ||T|| = 1} dist((T, S), span C_j)
    in the product TH norm.
    """
    _check_compatible(c1, c2)
    d12, _ = _directed_distance(c1, c2, normalize)
    d21, _ = _directed_distance(c2, c1, normalize)
    return max(d12, d21)


def admittance_difference_norm(c1: CauchySet, c2: CauchySet, steps: int = 20, seed: int = 0) -> float:
    """
    ||Lambda_1 - Lambda_2|| restricted to the probe span, TH norms on both
    sides, by power iteration on dS R_T^-1.
    """
    _check_compatible(c1, c2)
    T1, S1 = c1.features()
    T2, S2 = c2.features()
    if T1.shape != T2.shape or not np.allclose(T1, T2):
        raise ValueError("Admittance comparison needs both sets built from the same probes")
    _, R, piv = qr(T1, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag >= RANK_TOLERANCE * diag[0])) if diag.size and diag[0] else 0
    if rank == 0:
        return 0.0
    R = R[:rank, :rank]
    D = (S1 - S2)[:, piv[:rank]]

    rng = make_rng(seed)
    y = rng.standard_normal(rank) + 1j * rng.standard_normal(rank)
    y /= np.linalg.norm(y)
    sigma = 0.0
    for _ in range(steps):
        v = D @ solve_triangular(R, y)
        sigma = float(np.linalg.norm(v))
        w = solve_triangular(R, D.conj().T @ v, trans='C')
        norm_w = np.linalg.norm(w)
        if norm_w == 0:
            return 0.0
        y = w / norm_w
    return sigma
