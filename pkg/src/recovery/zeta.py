"""
Complex frequency pairs zeta1, zeta2 for a target Fourier mode xi, and the
configuration of a recovery run.
"""

from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.cgo.faddeev import zeta_constraint_error
from src.utils.exceptions import ConfigError

ZETA_TOLERANCE = 1e-12
MODULI = ("identity", "sqrt")


def orthonormal_frame(xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """eta1 = xi x e_m normalized (m the axis least aligned with xi), eta2 = xi x eta1 normalized."""
    xi = np.asarray(xi, dtype=float)
    e = np.zeros(3)
    e[int(np.argmin(np.abs(xi)))] = 1.0
    eta1 = np.cross(xi, e)
    eta1 /= np.linalg.norm(eta1)
    eta2 = np.cross(xi, eta1)
    return eta1, eta2 / np.linalg.norm(eta2)


@dataclass(frozen=True)
class ZetaPair:
    xi: np.ndarray
    tau: float
    eta1: np.ndarray
    eta2: np.ndarray
    zeta1: np.ndarray
    zeta2: np.ndarray

    @property
    def modulus(self) -> float:
        return float(np.linalg.norm(self.zeta1))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'xi': self.xi.tolist(),
            'tau': self.tau,
            'zeta1': self.zeta1,
            'zeta2': self.zeta2,
        }


def make_zeta_pair(xi, tau: float, k0_sq: float) -> ZetaPair:
    """
    zeta1 = -xi/2 + i (tau^2 + |xi|^2/4)^(1/2) eta1 + (tau^2 + k0^2)^(1/2) eta2,
    zeta2 =  xi/2 - i (tau^2 + |xi|^2/4)^(1/2) eta1 + (tau^2 + k0^2)^(1/2) eta2,
    so zeta1 - conj(zeta2) = -xi and zeta_j . zeta_j = k0^2.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,):
        raise ValueError(f"xi must be a real 3-vector, got shape {xi.shape}")
    if not np.any(xi):
        raise ValueError("xi = 0 has no zeta pair; the zero mode is extrapolated")
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    eta1, eta2 = orthonormal_frame(xi)
    im_part = np.sqrt(tau ** 2 + np.dot(xi, xi) / 4.0)
    re_part = np.sqrt(tau ** 2 + k0_sq)
    zeta1 = -xi / 2.0 + 1j * im_part * eta1 + re_part * eta2
    zeta2 = xi / 2.0 - 1j * im_part * eta1 + re_part * eta2

    for z in (zeta1, zeta2):
        err = zeta_constraint_error(z, k0_sq)
        if err > ZETA_TOLERANCE:
            raise ValueError(f"zeta.zeta constraint violated by {err:.3e} for xi={xi.tolist()}")
    return ZetaPair(xi, float(tau), eta1, eta2, zeta1, zeta2)


def modulus_of_continuity(name: str):
    """B(r) with r <= B(r) on [0, 1]."""
    if name == "identity":
        return lambda r: r
    if name == "sqrt":
        return np.sqrt
    raise ConfigError(f"Unknown modulus of continuity: {name} (choose from {MODULI})")


@dataclass
class RecoveryConfig:
    tau: float = 10.0
    rcut: Optional[float] = None
    s1: float = -0.5
    s2: float = 0.45
    modulus: str = "identity"
    delta: float = -0.5
    symbol_floor: float = 1e-6
    fixed_point: Dict[str, Any] = field(default_factory=dict)
    threads: int = 1
    abort_fraction: float = 0.05
    picard_tol: float = 1e-8
    picard_max_iter: int = 50
    solve_tol: float = 1e-10

    def __post_init__(self):
        if self.tau < 1:
            raise ConfigError(f"tau must be >= 1, got {self.tau}")
        if not self.s1 < 0 < self.s2 < 0.5:
            raise ConfigError(f"Need s1 < 0 < s2 < 1/2, got s1={self.s1}, s2={self.s2}")
        if self.rcut is not None and self.rcut <= 0:
            raise ConfigError(f"rcut must be positive, got {self.rcut}")
        if not 0 <= self.abort_fraction < 1:
            raise ConfigError(f"abort_fraction must lie in [0, 1), got {self.abort_fraction}")
        modulus_of_continuity(self.modulus)

    @property
    def theta(self) -> float:
        """theta with 0 = theta s1 + (1 - theta) s2."""
        return self.s2 / (self.s2 - self.s1)

    def cutoff(self) -> float:
        """R = tau^(2/3) unless set explicitly."""
        return float(self.rcut) if self.rcut is not None else float(self.tau ** (2.0 / 3.0))

    def with_tau(self, tau: float) -> "RecoveryConfig":
        data = asdict(self)
        data['tau'] = tau
        return RecoveryConfig(**data)

    @classmethod
    def from_config(cls, config: Dict[str, Any], **overrides) -> "RecoveryConfig":
        section = dict(config.get('recovery', {}) or {})
        faddeev = config.get('faddeev', {}) or {}
        runtime = config.get('runtime', {}) or {}
        data = {
            'tau': float(section.get('tau', 10.0)),
            'rcut': section.get('rcut'),
            's1': float(section.get('s1', -0.5)),
            's2': float(section.get('s2', 0.45)),
            'modulus': section.get('modulus', 'identity'),
            'delta': float(faddeev.get('delta', -0.5)),
            'symbol_floor': float(faddeev.get('symbol_floor', 1e-6)),
            'fixed_point': dict(config.get('fixed_point', {}) or {}),
            'threads': int(runtime.get('threads', 1)),
            'abort_fraction': float(section.get('abort_fraction', 0.05)),
            'picard_tol': float(section.get('picard_tol', 1e-8)),
            'picard_max_iter': int(section.get('picard_max_iter', 50)),
        }
        if data['rcut'] in ('auto', None):
            data['rcut'] = None
        else:
            data['rcut'] = float(data['rcut'])
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)
