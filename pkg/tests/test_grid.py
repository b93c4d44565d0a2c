import numpy as np
import pytest

from src.grid import calculus
from src.grid.field_io import decode_field, encode_field, read_field, write_field
from src.grid.grid import Grid3
from src.grid.state import StateY, inner_omega, norm_omega, weighted_norm_array
from src.utils.exceptions import ConfigError, GridMismatch


class TestGrid3:
    def test_geometry(self, grid16):
        assert grid16.h == pytest.approx(0.25)
        assert grid16.m == 4
        assert grid16.shape == (16, 16, 16)
        assert grid16.axis[0] == pytest.approx(-2.0)

    def test_masks(self, grid16):
        # Omega interior has (2m - 1)^3 nodes, the closure (2m + 1)^3
        assert grid16.omega_mask.sum() == 7 ** 3
        assert grid16.closure_mask.sum() == 9 ** 3
        assert np.all(grid16.closure_mask[grid16.omega_mask])

    def test_trapezoid_weights_integrate_volume(self, grid24):
        assert grid24.trapezoid_weights.sum() == pytest.approx((2 * grid24.a) ** 3)

    @pytest.mark.parametrize("n", [7, 6, 4])
    def test_rejects_bad_n(self, n):
        with pytest.raises(ConfigError):
            Grid3(n)

    @pytest.mark.parametrize("n, a, m", [(10, 1.0, 3), (16, 0.9, 4), (12, 1.1, 3), (20, 0.7, 4)])
    def test_cube_off_grid_snaps_to_nearest_plane(self, n, a, m):
        grid = Grid3(n, 2.0, a)
        assert grid.m == m
        assert abs(grid.face_half_width - a) <= grid.h / 2 + 1e-12
        assert grid.omega_mask.sum() == (2 * m - 1) ** 3
        assert grid.closure_mask.sum() == (2 * m + 1) ** 3
        assert grid.trapezoid_weights.sum() == pytest.approx((2 * grid.face_half_width) ** 3)

    @pytest.mark.parametrize("a", [0.1, 1.9])
    def test_rejects_cube_without_interior_planes(self, a):
        with pytest.raises(ConfigError):
            Grid3(8, 2.0, a)

    def test_check_same(self, grid16, grid24):
        grid16.check_same(Grid3(16))
        with pytest.raises(GridMismatch):
            grid16.check_same(grid24)


class TestCalculus:
    def test_spectral_derivative_of_mode(self, grid16):
        x = grid16.coords
        k = np.pi / grid16.L * 3
        f = np.exp(1j * k * x[1])
        df = calculus.partial(f, grid16, 1)
        np.testing.assert_allclose(df, 1j * k * f, atol=1e-10)

    def test_curl_grad_and_div_curl_vanish(self, grid16):
        rng = np.random.default_rng(1)
        f = rng.standard_normal(grid16.shape)
        u = rng.standard_normal((3,) + grid16.shape)
        assert np.abs(calculus.curl(calculus.grad(f, grid16), grid16)).max() < 1e-10
        assert np.abs(calculus.div(calculus.curl(u, grid16), grid16)).max() < 1e-10

    def test_shifted_class_derivative(self, grid16):
        shift = np.array([np.pi / (2 * grid16.L), 0.0, 0.0])
        x = grid16.coords
        k = np.pi / grid16.L
        f = np.exp(1j * (k + shift[0]) * x[0])
        df = calculus.partial(f, grid16, 0, shift=shift)
        np.testing.assert_allclose(df, 1j * (k + shift[0]) * f, atol=1e-10)

    def test_fd_laplacian_matches_trace_of_fd_hessian(self, grid16):
        rng = np.random.default_rng(2)
        f = rng.standard_normal(grid16.shape)
        lap = calculus.laplacian(f, grid16, method=calculus.FD)
        hess = calculus.hessian(f, grid16, method=calculus.FD)
        np.testing.assert_allclose(lap, np.trace(hess).real, atol=1e-9)

    def test_unknown_method(self, grid16):
        with pytest.raises(ValueError):
            calculus.grad(np.zeros(grid16.shape), grid16, method="magic")


class TestState:
    def test_inner_product_is_conjugate_symmetric(self, grid16):
        rng = np.random.default_rng(3)
        shape = (8,) + grid16.shape
        Y = StateY(grid16, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        Z = StateY(grid16, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        assert inner_omega(Y, Z) == pytest.approx(np.conj(inner_omega(Z, Y)))
        assert norm_omega(Y) ** 2 == pytest.approx(inner_omega(Y, Y).real)

    def test_wrong_shape(self, grid16):
        with pytest.raises(ValueError):
            StateY(grid16, np.zeros((3,) + grid16.shape))

    def test_weighted_norm_rejects_zero_exponent(self, grid16):
        with pytest.raises(ValueError):
            weighted_norm_array(np.ones(grid16.shape), grid16, 0.0)


class TestFieldIO:
    def test_state_file(self, grid16, tmp_path):
        rng = np.random.default_rng(4)
        values = rng.standard_normal((8,) + grid16.shape) + 1j * rng.standard_normal((8,) + grid16.shape)
        path = write_field(tmp_path / "y.cgof", grid16, values, 'state8')
        grid, back, kind = read_field(path)
        assert grid == grid16
        assert kind == 'state8'
        np.testing.assert_array_equal(back, values)

    def test_encoding_is_deterministic(self, grid16):
        values = np.arange(np.prod(grid16.shape), dtype=float).reshape(grid16.shape)
        assert encode_field(grid16, values, 'scalar') == encode_field(grid16, values, 'scalar')

    def test_bad_magic(self):
        with pytest.raises(ConfigError):
            decode_field(b"XXXX\x00\x00\x00\x00")

    def test_shape_checked(self, grid16):
        with pytest.raises(ValueError):
            encode_field(grid16, np.zeros((3,) + grid16.shape), 'scalar')
