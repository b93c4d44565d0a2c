import numpy as np
import pytest

from src.coefficients.pair import synth_coefficients
from src.forward.boundary import (BoundaryField, SCALAR, TANGENTIAL, normal_trace,
                                  surface_divergence, tangential_trace)
from src.forward.cauchy import (PlaneWave, delta_C, fibonacci_directions, generate_cauchy_set,
                                plane_wave_probes, read_cauchy_set, transverse_frame,
                                write_cauchy_set)
from src.forward.solver import (MaxwellForwardSolver, admittance_apply, solve_forward,
                               trace_identity_defects)
from src.forward.th_norm import besov_norm, th_inner, th_norm, th_product_constant
from src.grid.grid import Grid3
from src.utils.exceptions import ConfigError, GridMismatch
from tests.conftest import bump_spec


def rel_error(approx, exact):
    return np.abs(approx - exact).max() / np.abs(exact).max()


class TestBoundary:
    def test_shapes(self, grid16):
        w = BoundaryField.zeros(grid16)
        assert w.data.shape == (6, 2, 9, 9)
        assert BoundaryField.zeros(grid16, SCALAR).data.shape == (6, 1, 9, 9)

    def test_bad_shape(self, grid16):
        with pytest.raises(ValueError):
            BoundaryField(grid16, np.zeros((6, 1, 9, 9)), TANGENTIAL)

    def test_grid_mismatch(self, grid16, grid24):
        with pytest.raises(GridMismatch):
            BoundaryField.zeros(grid16) + BoundaryField.zeros(grid24)

    def test_normal_field_has_no_tangential_trace(self, grid16):
        u = np.zeros((3,) + grid16.shape)
        u[0] = 1.0
        w = tangential_trace(u, grid16)
        assert np.abs(w.data[0:2]).max() == 0
        n = normal_trace(u, grid16)
        np.testing.assert_allclose(n.data[0], -1.0)
        np.testing.assert_allclose(n.data[1], 1.0)

    def test_constant_tangential_field_is_divergence_free(self, grid16):
        w = BoundaryField(grid16, np.full((6, 2, 9, 9), 2.0 - 1.0j))
        assert np.abs(surface_divergence(w).data).max() < 1e-12


class TestTHNorm:
    def test_constant_on_one_face(self, grid16):
        w = BoundaryField.zeros(grid16)
        w.data[3, 0] = 1.5
        assert besov_norm(w) == pytest.approx(2 * grid16.a * 1.5)
        assert th_norm(w) == pytest.approx(2 * grid16.a * 1.5)

    def test_constant_on_snapped_face(self):
        grid = Grid3(10, 2.0, 1.0)
        w = BoundaryField.zeros(grid)
        w.data[1, 1] = 2.0
        assert besov_norm(w) == pytest.approx(2 * grid.face_half_width * 2.0)
        assert grid.face_half_width == pytest.approx(1.2)

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_cosine_mode(self, grid16, j):
        a = grid16.a
        x = np.linspace(-a, a, 2 * grid16.m + 1)
        k = np.pi * j / (2 * a)
        w = BoundaryField.zeros(grid16)
        w.data[0, 1] = np.cos(k * (x + a))[:, None] * np.ones(x.size)[None, :]
        assert besov_norm(w) == pytest.approx(a * np.sqrt(2) * (1 + k ** 2) ** -0.25)

    def test_inner_product(self, grid16):
        rng = np.random.default_rng(3)
        w = BoundaryField(grid16, rng.standard_normal((6, 2, 9, 9)))
        assert th_inner(w, w).real > 0
        assert th_inner(w, w.scaled(1j)) == pytest.approx(-1j * th_inner(w, w))

    def test_product_constant_of_constant_multiplier(self, grid16):
        rng = np.random.default_rng(8)
        w = BoundaryField(grid16, rng.standard_normal((6, 2, 9, 9)))
        f = np.full(grid16.shape, 2.0)
        assert th_product_constant([(f, w)]) == pytest.approx(1.0)
        assert th_product_constant([(f, BoundaryField.zeros(grid16))]) == 0.0


class TestProbes:
    def test_directions_are_unit(self):
        d = fibonacci_directions(10)
        np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)

    def test_transverse_frame(self):
        d = np.array([0.3, -0.4, np.sqrt(0.75)])
        p1, p2 = transverse_frame(d)
        assert abs(np.dot(p1, d)) < 1e-12 and abs(np.dot(p2, d)) < 1e-12
        assert abs(np.dot(p1, p2)) < 1e-12

    def test_odd_probe_count(self):
        with pytest.raises(ConfigError):
            plane_wave_probes(5, 1.0)


class TestSolver:
    def test_plane_wave(self, background16):
        c = background16
        wave = PlaneWave(np.array([0.0, 0.6, 0.8]), np.array([1.0, 0.0, 0.0]), c.k0)
        T = tangential_trace(wave.electric(c.grid), c.grid)
        sol = MaxwellForwardSolver(c).solve(T)
        assert rel_error(sol.E, wave.electric(c.grid)) < 0.05
        assert rel_error(sol.H, wave.magnetic(c.grid, c.omega, c.mu0)) < 0.15

    def test_admittance_is_magnetic_trace(self, bumped16):
        wave = PlaneWave(np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]), bumped16.k0)
        T = tangential_trace(wave.electric(bumped16.grid), bumped16.grid)
        sol = solve_forward(bumped16, T)
        assert sol.residual < 1e-6
        S = admittance_apply(bumped16, T)
        np.testing.assert_allclose(S.data, tangential_trace(sol.H, bumped16.grid).data, atol=1e-10)

    def test_batched_solve_matches_single_solves(self, bumped16):
        solver = MaxwellForwardSolver(bumped16)
        traces = [tangential_trace(wave.electric(bumped16.grid), bumped16.grid)
                  for wave in plane_wave_probes(2, bumped16.k0)]
        e_b, e_i, residuals = solver.interior_solve(traces)
        assert e_i.shape[1] == 2 and residuals.shape == (2,)
        for j, T in enumerate(traces):
            single = solver.solve(T)
            batched = solver.solution_from_edges(e_b[:, j], e_i[:, j], residuals[j])
            np.testing.assert_allclose(batched.E, single.E, atol=1e-10)
            np.testing.assert_allclose(batched.H, single.H, atol=1e-10)

    def test_zero_data(self, bumped16):
        sol = MaxwellForwardSolver(bumped16).solve(BoundaryField.zeros(bumped16.grid))
        assert np.abs(sol.E).max() == 0
        assert np.abs(sol.H).max() == 0

    def test_scalar_data_rejected(self, background16):
        with pytest.raises(ValueError):
            MaxwellForwardSolver(background16).solve(BoundaryField.zeros(background16.grid, SCALAR))

    def test_trace_identities_of_plane_wave(self, grid32):
        c = synth_coefficients(grid32, bump_spec(amplitude=0.0))
        wave = PlaneWave(np.array([0.6, 0.0, 0.8]), np.array([0.0, 1.0, 0.0]), c.k0)
        defects = trace_identity_defects(c, wave.electric(grid32), wave.magnetic(grid32, c.omega, c.mu0))
        assert defects['electric'] < 0.05
        assert defects['magnetic'] < 0.05


class TestCauchySets:
    @pytest.fixture
    def cauchy16(self, bumped16):
        return generate_cauchy_set(bumped16, probes=4)

    def test_self_distance(self, cauchy16):
        assert len(cauchy16) == 4
        assert delta_C(cauchy16, cauchy16) < 1e-10

    def test_scaled_set_spans_the_same_data(self, cauchy16):
        assert delta_C(cauchy16, cauchy16.scaled(2 + 1j)) < 1e-10

    def test_threads_keep_probe_order(self, bumped16, cauchy16):
        threaded = generate_cauchy_set(bumped16, probes=4, threads=2)
        for a, b in zip(cauchy16.data, threaded.data):
            np.testing.assert_allclose(a.S.data, b.S.data)

    def test_write_read(self, cauchy16, tmp_path):
        write_cauchy_set(cauchy16, tmp_path / "cauchy")
        back = read_cauchy_set(tmp_path / "cauchy")
        assert back.grid == cauchy16.grid
        assert len(back) == len(cauchy16)
        np.testing.assert_array_equal(back.data[2].S.data, cauchy16.data[2].S.data)
        assert delta_C(back, cauchy16) < 1e-10

    def test_distance_grows_with_perturbation(self, background16):
        base = generate_cauchy_set(background16, probes=4)
        distances = [delta_C(base, generate_cauchy_set(
            synth_coefficients(background16.grid, bump_spec(amplitude=a)), probes=4))
            for a in (0.01, 0.03, 0.1, 0.3)]
        assert distances[0] > 0
        assert all(b > a for a, b in zip(distances, distances[1:]))

    def test_frequency_mismatch(self, cauchy16):
        other = cauchy16.scaled(1.0)
        other.omega = 2.0
        with pytest.raises(ValueError):
            delta_C(cauchy16, other)

    def test_grid_mismatch(self, cauchy16):
        other = generate_cauchy_set(synth_coefficients(Grid3(24), bump_spec()), probes=4)
        with pytest.raises(GridMismatch):
            delta_C(cauchy16, other)
