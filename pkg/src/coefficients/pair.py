"""
Electromagnetic coefficient pairs (gamma, mu), the bump generator and the
derived scalar fields alpha, beta, kappa, q1, q2.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
import logging

import numpy as np
from scipy import ndimage

from src.grid import calculus
from src.grid.grid import Grid3
from src.utils.exceptions import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class Bump:
    """C-infinity bump amplitude * exp(-1/(1 - |x-c|^2/r^2)) inside B(c, r)."""
    center: np.ndarray
    radius: float
    amplitude: complex

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Bump":
        try:
            center = np.asarray(data['center'], dtype=float)
            radius = float(data['radius'])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Bad bump descriptor {data}: {e}") from e
        if center.shape != (3,) or radius <= 0:
            raise ConfigError(f"Bump needs a 3-vector center and positive radius: {data}")
        amplitude = complex(float(data.get('amplitude_re', data.get('amplitude', 0.0))),
                            float(data.get('amplitude_im', 0.0)))
        return cls(center, radius, amplitude)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'center': [float(c) for c in self.center],
            'radius': float(self.radius),
            'amplitude_re': float(self.amplitude.real),
            'amplitude_im': float(self.amplitude.imag),
        }

    def evaluate(self, coords: np.ndarray) -> np.ndarray:
        c = self.center.reshape((3,) + (1,) * (coords.ndim - 1))
        t = np.sum((coords - c) ** 2, axis=0) / self.radius ** 2
        inside = t < 1.0
        out = np.zeros(coords.shape[1:])
        out[inside] = np.exp(-1.0 / (1.0 - t[inside]))
        return self.amplitude * out


@dataclass
class CoefficientPair:
    """
    gamma = eps + i sigma/omega (complex) and mu (real) sampled on a grid,
    with the background constants and the a-priori data (M, s).
    """
    grid: Grid3
    gamma: np.ndarray
    mu: np.ndarray
    omega: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0
    a_priori_M: float = 10.0
    sobolev_s: float = 0.25
    spec: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=np.complex128)
        self.mu = np.asarray(self.mu, dtype=float)
        if self.gamma.shape != self.grid.shape or self.mu.shape != self.grid.shape:
            raise ValueError("gamma and mu must be sampled on the grid nodes")
        if self.omega <= 0:
            raise ConfigError(f"omega must be positive, got {self.omega}")
        if not 0 < self.sobolev_s < 0.5:
            raise ConfigError(f"Sobolev exponent s must lie in (0, 1/2), got {self.sobolev_s}")

    @property
    def k0(self) -> float:
        """omega * sqrt(eps0 * mu0)."""
        return self.omega * np.sqrt(self.eps0 * self.mu0)

    @property
    def k0_sq(self) -> float:
        return self.omega ** 2 * self.eps0 * self.mu0

    def is_elliptic(self) -> bool:
        bound = 1.0 / self.a_priori_M
        return bool(np.all(self.gamma.real >= bound) and np.all(self.mu >= bound)
                    and np.all(self.gamma.imag >= 0))

    def with_fields(self, gamma: np.ndarray, mu: np.ndarray) -> "CoefficientPair":
        return CoefficientPair(self.grid, gamma, mu, self.omega, self.eps0, self.mu0,
                               self.a_priori_M, self.sobolev_s, dict(self.spec))


@dataclass
class DerivedScalars:
    """alpha = log gamma, beta = log mu, kappa and the derivative data used by Q."""
    grid: Grid3
    omega: float
    k0_sq: float
    alpha: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray
    grad_alpha: np.ndarray
    grad_beta: np.ndarray
    hess_alpha: np.ndarray
    hess_beta: np.ndarray
    grad_kappa: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    method: str = calculus.SPECTRAL

    @property
    def lap_alpha(self) -> np.ndarray:
        return np.trace(self.hess_alpha)

    @property
    def lap_beta(self) -> np.ndarray:
        return np.trace(self.hess_beta)

    @property
    def a_vec(self) -> np.ndarray:
        """a = (1/2) D alpha."""
        return -0.5j * self.grad_alpha

    @property
    def b_vec(self) -> np.ndarray:
        """b = (1/2) D beta."""
        return -0.5j * self.grad_beta


def bumps_from_spec(spec: Dict[str, Any]) -> Dict[str, List[Bump]]:
    """Parsed gamma and mu bump lists; mu bumps must be real."""
    bumps = {
        'gamma': [Bump.from_dict(b) for b in spec.get('gamma_bumps', [])],
        'mu': [Bump.from_dict(b) for b in spec.get('mu_bumps', [])],
    }
    for b in bumps['mu']:
        if b.amplitude.imag != 0:
            raise ConfigError("mu bumps must be real")
    return bumps


def synth_coefficients(grid: Grid3, spec: Optional[Dict[str, Any]] = None) -> CoefficientPair:
    """
    Build gamma = eps0 + sum bumps, mu = mu0 + sum bumps from a JSON-style spec
    {omega, eps0, mu0, M, s, gamma_bumps: [...], mu_bumps: [...]}.
    """
    spec = dict(spec or {})
    omega = float(spec.get('omega', 1.0))
    eps0 = float(spec.get('eps0', 1.0))
    mu0 = float(spec.get('mu0', 1.0))
    M = float(spec.get('M', 10.0))
    s = float(spec.get('s', 0.25))

    bumps = bumps_from_spec(spec)
    gamma_bumps, mu_bumps = bumps['gamma'], bumps['mu']

    for b in gamma_bumps + mu_bumps:
        if np.linalg.norm(b.center) + b.radius > grid.rho + 1e-12:
            raise ConfigError(
                f"Bump at {b.center.tolist()} with radius {b.radius} leaves B(O; {grid.rho:.4f})"
            )
        if grid.rho >= grid.L:
            raise ConfigError("Ball B(O; a*sqrt(3)) must fit inside the periodic box")
    gamma = np.full(grid.shape, eps0, dtype=np.complex128)
    mu = np.full(grid.shape, mu0, dtype=float)
    for b in gamma_bumps:
        gamma = gamma + b.evaluate(grid.coords)
    for b in mu_bumps:
        mu = mu + b.evaluate(grid.coords).real

    pair = CoefficientPair(grid, gamma, mu, omega, eps0, mu0, M, s, spec)
    if not pair.is_elliptic():
        raise ConfigError(
            f"Synthesized coefficients violate ellipticity with M={M}: "
            f"min Re gamma={gamma.real.min():.4g}, min mu={mu.min():.4g}, "
            f"min Im gamma={gamma.imag.min():.4g}"
        )
    logger.debug(f"Synthesized pair: {len(gamma_bumps)} gamma bumps, {len(mu_bumps)} mu bumps")
    return pair


def _locally_constant(field: np.ndarray, background: complex) -> np.ndarray:
    """Nodes whose 2-node neighbourhood holds only the background value."""
    active = field != background
    if not active.any():
        return np.ones(field.shape, dtype=bool)
    return ~ndimage.binary_dilation(active, iterations=2)


def derive_scalars(c: CoefficientPair, method: str = calculus.SPECTRAL) -> DerivedScalars:
    """
    alpha, beta, kappa = omega mu^(1/2) gamma^(1/2) and
    q1 = -1/2 Lap beta - kappa^2 - 1/4 (D beta . D beta),
    q2 = -1/2 Lap alpha - kappa^2 - 1/4 (D alpha . D alpha), with D = (1/i) grad.

    Derivatives vanish identically where the coefficients equal the background
    in a neighbourhood, so q + omega^2 eps0 mu0 keeps the support of the bumps.
    """
    if not c.is_elliptic():
        raise ValueError("derive_scalars needs an elliptic coefficient pair")
    grid = c.grid
    alpha = np.log(c.gamma)
    beta = np.log(c.mu)
    kappa = c.omega * np.sqrt(c.mu) * np.sqrt(c.gamma)

    flat_a = _locally_constant(c.gamma, c.eps0)
    flat_b = _locally_constant(c.mu, c.mu0)
    flat_k = flat_a & flat_b

    grad_alpha = np.where(flat_a, 0.0, calculus.grad(alpha, grid, method=method))
    grad_beta = np.where(flat_b, 0.0, calculus.grad(beta.astype(np.complex128), grid, method=method).real)
    hess_alpha = np.where(flat_a, 0.0, calculus.hessian(alpha, grid, method=method))
    hess_beta = np.where(flat_b, 0.0, calculus.hessian(beta.astype(np.complex128), grid, method=method).real)
    grad_kappa = np.where(flat_k, 0.0, calculus.grad(kappa, grid, method=method))

    k2 = kappa ** 2
    # D f . D f = -grad f . grad f
    q1 = -0.5 * np.trace(hess_beta) - k2 + 0.25 * np.sum(grad_beta * grad_beta, axis=0)
    q2 = -0.5 * np.trace(hess_alpha) - k2 + 0.25 * np.sum(grad_alpha * grad_alpha, axis=0)

    return DerivedScalars(
        grid=grid, omega=c.omega, k0_sq=c.k0_sq,
        alpha=alpha, beta=beta, kappa=kappa,
        grad_alpha=grad_alpha, grad_beta=grad_beta,
        hess_alpha=hess_alpha, hess_beta=hess_beta,
        grad_kappa=grad_kappa, q1=q1, q2=q2, method=method,
    )
