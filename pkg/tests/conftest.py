"""Shared fixtures: small grids and coefficient pairs."""

import pytest

from src.coefficients.pair import synth_coefficients
from src.grid.grid import Grid3


def bump_spec(amplitude: float = 0.2, radius: float = 0.5, mu_amplitude: float = 0.0, **extra):
    spec = {
        'omega': 1.0,
        'eps0': 1.0,
        'mu0': 1.0,
        'M': 10.0,
        's': 0.25,
        'gamma_bumps': [],
        'mu_bumps': [],
    }
    if amplitude:
        spec['gamma_bumps'].append({'center': [0.0, 0.0, 0.0], 'radius': radius,
                                    'amplitude_re': amplitude, 'amplitude_im': 0.0})
    if mu_amplitude:
        spec['mu_bumps'].append({'center': [0.1, 0.0, 0.0], 'radius': radius,
                                 'amplitude_re': mu_amplitude, 'amplitude_im': 0.0})
    spec.update(extra)
    return spec


@pytest.fixture
def grid16():
    return Grid3(16)


@pytest.fixture
def grid24():
    return Grid3(24)


@pytest.fixture
def grid32():
    return Grid3(32)


@pytest.fixture
def background16(grid16):
    return synth_coefficients(grid16, bump_spec(amplitude=0.0))


@pytest.fixture
def bumped16(grid16):
    return synth_coefficients(grid16, bump_spec(amplitude=0.2, mu_amplitude=0.1))
