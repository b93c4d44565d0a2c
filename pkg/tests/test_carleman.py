import csv

import numpy as np
import pytest

from src.carleman.estimate import (CarlemanConfig, absorb_check, carleman_ratio, carleman_sweep,
                                   fit_constant, random_test_functions, weight_bounds_hold,
                                   write_carleman_csv)
from src.recovery.elliptic import exact_discrete_fg, true_differences
from src.utils.exceptions import ConfigError


@pytest.fixture
def cfg16(grid16):
    return CarlemanConfig(grid16)


@pytest.fixture
def bumps16(grid16):
    return random_test_functions(grid16, 3, seed=5)


class TestConfig:
    def test_default_point_outside(self, cfg16, grid16):
        np.testing.assert_allclose(cfg16.x0, [3.0 * grid16.a, 0.0, 0.0])
        assert 0 < cfg16.d1 < cfg16.d2

    def test_point_in_cube(self, grid16):
        with pytest.raises(ConfigError):
            CarlemanConfig(grid16, x0=(0.5, 0.0, 1.0))

    @pytest.mark.parametrize("h", [0.0, -0.1, 1.5])
    def test_bad_h(self, grid16, h):
        with pytest.raises(ConfigError):
            CarlemanConfig(grid16, h_values=(0.1, h))

    @pytest.mark.parametrize("h", [0.05, 0.2, 1.0])
    def test_weight_bounds(self, cfg16, h):
        assert weight_bounds_hold(cfg16, h)

    def test_exponent_guard(self, cfg16):
        assert cfg16.shift(0.5) == 0.0
        assert cfg16.shift(0.01) == pytest.approx(2.0 * cfg16.d2 / 0.01)


class TestRatio:
    def test_zero_function(self, cfg16, grid16):
        result = carleman_ratio(np.zeros(grid16.shape), cfg16, 0.1)
        assert result.ratio == 0.0

    def test_scale_invariance(self, cfg16, bumps16):
        u = bumps16[0]
        r1 = carleman_ratio(u, cfg16, 0.2)
        r2 = carleman_ratio((3.0 - 2.0j) * u, cfg16, 0.2)
        assert r2.ratio == pytest.approx(r1.ratio, rel=1e-10)

    def test_interior_bumps_have_no_boundary_terms(self, cfg16, bumps16):
        result = carleman_ratio(bumps16[1], cfg16, 0.2)
        assert result.terms['u_boundary'] == 0.0
        assert result.rhs > 0 and np.isfinite(result.ratio)

    def test_shifted_exponent_stays_finite(self, cfg16, bumps16):
        result = carleman_ratio(bumps16[0], cfg16, 0.01)
        assert result.log_shift > 0
        assert np.isfinite(result.lhs) and np.isfinite(result.rhs)

    def test_sweep_keeps_order(self, grid16, bumps16):
        cfg = CarlemanConfig(grid16, h_values=(0.3, 0.1, 0.2))
        results = carleman_sweep(bumps16[2], cfg, threads=2)
        assert [r.h for r in results] == [0.3, 0.1, 0.2]

    def test_test_functions_are_seeded(self, grid16, bumps16):
        again = random_test_functions(grid16, 3, seed=5)
        for u, v in zip(bumps16, again):
            np.testing.assert_array_equal(u, v)


class TestFitAndAbsorb:
    def test_fit_constant(self, cfg16, bumps16):
        results = [carleman_ratio(u, cfg16, h) for u in bumps16 for h in (0.1, 0.2)]
        fit = fit_constant(results)
        assert fit['C'] == pytest.approx(max(r.ratio for r in results))
        assert fit['spread'] >= 1.0

    def test_fit_constant_empty(self):
        assert fit_constant([]) == {'C': 0.0, 'median': 0.0, 'spread': 0.0}

    def test_absorb_check(self, bumped16, background16):
        cfg = CarlemanConfig(bumped16.grid, h_values=(0.1, 0.2, 0.4))
        phi1, phi2 = true_differences(bumped16, background16)
        f, g = exact_discrete_fg(bumped16, background16)
        report = absorb_check(phi1, phi2, f, g, bumped16, background16, cfg, delta_c=0.01)
        assert len(report.ratios) == 3
        assert report.C_fit == max(report.ratios)
        assert report.h_threshold == pytest.approx(report.C_fit ** (-1.0 / 3.0))
        assert report.modulus_bound == 0.01
        assert set(report.to_dict()) >= {'lhs', 'rhs', 'log_margins'}


def test_write_csv(cfg16, bumps16, tmp_path):
    results = carleman_sweep(bumps16[0], cfg16)
    path = write_carleman_csv(results, tmp_path / "carleman.csv")
    with open(path, newline='', encoding='utf-8') as f:
        rows = list(csv.DictReader(f))
    assert [float(r['h']) for r in rows] == list(cfg16.h_values)
    assert float(rows[0]['ratio']) == pytest.approx(results[0].ratio)
