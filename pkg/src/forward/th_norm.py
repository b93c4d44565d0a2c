"""
Discrete TH(dOmega) norm: ||w||_{B^-1/2} + ||Div w||_{B^-1/2}.

Each face is evenly reflected to a (4m) x (4m) periodic array and its
Fourier coefficients are weighted by (1 + |k|^2)^(-1/2). Faces do not talk
to each other, which approximates the intrinsic norm near cube edges.
"""

from typing import Iterable, Tuple

import numpy as np

from src.coefficients.admissibility import boundary_c01_norm
from src.forward.boundary import BoundaryField, face_lipschitz_product, scalar_trace, surface_divergence

BESOV_EXPONENT = -0.5


def _reflect(values: np.ndarray) -> np.ndarray:
    """Even extension of (..., s, s) samples to period 2(s-1) on both axes."""
    out = np.concatenate([values, values[..., -2:0:-1, :]], axis=-2)
    return np.concatenate([out, out[..., -2:0:-1]], axis=-1)


def _face_weights(w: BoundaryField, exponent: float) -> Tuple[np.ndarray, float]:
    grid = w.grid
    period = 4 * grid.m
    k = 2.0 * np.pi * np.fft.fftfreq(period, d=grid.h)
    ksq = k[:, None] ** 2 + k[None, :] ** 2
    area_ref = (4.0 * grid.face_half_width) ** 2
    return (1.0 + ksq) ** exponent, area_ref / 4.0


def besov_features(w: BoundaryField, exponent: float = BESOV_EXPONENT) -> np.ndarray:
    """
    Flat vector whose squared 2-norm is the squared discrete B^exponent norm
    of w (all faces and components).
    """
    weights, scale = _face_weights(w, exponent)
    period = weights.shape[0]
    coeffs = np.fft.fft2(_reflect(w.data)) / period ** 2
    return (np.sqrt(scale * weights) * coeffs).ravel()


def besov_norm(w: BoundaryField, exponent: float = BESOV_EXPONENT) -> float:
    return float(np.linalg.norm(besov_features(w, exponent)))


def th_features(w: BoundaryField) -> np.ndarray:
    """Feature map of the Hilbertian TH inner product (w and Div w stacked)."""
    return np.concatenate([besov_features(w), besov_features(surface_divergence(w))])


def th_norm(w: BoundaryField) -> float:
    """||w||_{B^-1/2} + ||Div w||_{B^-1/2}."""
    return besov_norm(w) + besov_norm(surface_divergence(w))


def th_inner(w1: BoundaryField, w2: BoundaryField) -> complex:
    return complex(np.vdot(th_features(w2), th_features(w1)))


def th_product_constant(samples: Iterable[Tuple[np.ndarray, BoundaryField]]) -> float:
    """
    Smallest C with ||f w||_TH <= C ||f||_{C^{0,1}(dOmega)} ||w||_TH over the
    given (f node field, w) pairs.
    """
    best = 0.0
    for f, w in samples:
        denom = boundary_c01_norm(f, w.grid) * th_norm(w)
        if denom == 0:
            continue
        product = face_lipschitz_product(scalar_trace(f, w.grid), w)
        best = max(best, th_norm(product) / denom)
    return best

