import numpy as np
import pytest

from src.cgo.builders import (ADJOINT, SCHRODINGER, adjoint_principal, build_adjoint_cgo,
                              build_maxwell_cgo, maxwell_principal, write_cgo_dump, zeta_modulus)
from src.cgo.faddeev import (FaddeevConfig, faddeev_operator, gzeta_apply, gzeta_derivative_bound,
                             gzeta_norm_ratio,
                             zeta_constraint_error, zeta_with_norm)
from src.cgo.remainder import solve_remainder
from src.coefficients.pair import derive_scalars
from src.grid.field_io import read_field
from src.grid.state import weighted_norm
from src.operators.assembly import assemble_Q
from src.utils.exceptions import NonContractive


def axis_zeta(modulus: float, k0_sq: float = 1.0) -> np.ndarray:
    # Im zeta along x keeps every shifted symbol away from zero
    return zeta_with_norm([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], modulus, k0_sq)


class TestFaddeev:
    def test_zeta_with_norm(self):
        zeta = axis_zeta(12.0)
        assert zeta_constraint_error(zeta, 1.0) < 1e-12
        assert zeta_modulus(zeta) == pytest.approx(12.0)

    def test_config_rejects_bad_zeta(self):
        with pytest.raises(ValueError):
            FaddeevConfig(zeta=np.array([1.0, 0.0, 0.0]), k0_sq=1.0)
        with pytest.raises(ValueError):
            FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=2.0)

    def test_config_rejects_bad_delta(self):
        with pytest.raises(ValueError):
            FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=1.0, delta=0.5)

    def test_lattice_shift(self, grid16):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=1.0)
        np.testing.assert_allclose(cfg.shift(grid16), [np.pi / (2 * grid16.L), 0.0, 0.0])

    def test_green_operator_inverts_faddeev_operator(self, grid16):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=1.0)
        rng = np.random.default_rng(9)
        phase = np.exp(1j * np.tensordot(cfg.shift(grid16), grid16.coords, axes=1))
        f = phase * (rng.standard_normal(grid16.shape) + 1j * rng.standard_normal(grid16.shape))
        u, floored = gzeta_apply(cfg, f, grid16)
        assert floored == 0
        np.testing.assert_allclose(faddeev_operator(cfg, u, grid16), f, atol=1e-9)

    def test_green_operator_decays_with_zeta(self, grid16):
        f = np.exp(-grid16.radius_sq).astype(complex)
        small = gzeta_norm_ratio(FaddeevConfig(zeta=axis_zeta(6.0), k0_sq=1.0), f, grid16)
        large = gzeta_norm_ratio(FaddeevConfig(zeta=axis_zeta(24.0), k0_sq=1.0), f, grid16)
        assert large < small

    def test_derivative_bound(self, grid16):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=1.0)
        assert gzeta_derivative_bound(cfg, np.zeros(grid16.shape), grid16) == 0.0
        bound = gzeta_derivative_bound(cfg, np.exp(-grid16.radius_sq).astype(complex), grid16)
        assert 0 < bound < np.inf

    def test_gzeta_needs_grid_for_arrays(self):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=1.0)
        with pytest.raises(ValueError):
            gzeta_apply(cfg, np.zeros((16, 16, 16)))


class TestRemainder:
    def test_background_remainder_vanishes(self, background16):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=background16.k0_sq)
        Q = assemble_Q(derive_scalars(background16))
        L = maxwell_principal(cfg.zeta, [1.0, 0, 0], [0, 1.0, 0], background16.k0)
        R, report = solve_remainder(Q, cfg, L)
        assert np.abs(R.data).max() < 1e-12
        assert report.iterations == 1

    def test_bad_damping(self, background16):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=1.0)
        Q = assemble_Q(derive_scalars(background16))
        with pytest.raises(ValueError):
            solve_remainder(Q, cfg, np.zeros(8), theta=1.5)

    def test_strong_potential_is_not_contractive(self, background16):
        # V = Q + k0^2 I = 400 I is far outside the contraction regime at |zeta| = 2
        cfg = FaddeevConfig(zeta=axis_zeta(2.0), k0_sq=1.0)
        Q = assemble_Q(derive_scalars(background16)).plus_identity(400.0)
        with pytest.raises(NonContractive):
            solve_remainder(Q, cfg, np.ones(8), max_iter=50)


class TestBuilders:
    def test_principal_parts(self):
        zeta = axis_zeta(12.0)
        L = maxwell_principal(zeta, [1, 0, 0], [0, 0, 0], 1.0)
        assert L[0] == pytest.approx(zeta[0] / 12.0)
        L_hat = adjoint_principal(zeta, [0, 1, 0], [0, 0, 1])
        assert L_hat[0] == 0 and L_hat[4] == 0
        assert L_hat[3] == pytest.approx(1.0 / 12.0)

    def test_background_maxwell_cgo(self, background16):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=background16.k0_sq)
        sol = build_maxwell_cgo(background16, cfg, [0, 1.0, 0], [0, 0, 0])
        assert sol.kind == SCHRODINGER
        assert np.abs(sol.R.data).max() < 1e-12
        assert sol.diagnostics['residual_norm'] < 1e-9
        assert sol.diagnostics['maxwell_residual'] < 1e-9

    def test_background_adjoint_cgo(self, background16):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=background16.k0_sq)
        a_hat = np.array([0, 1.0, 0])
        b_hat = np.array([0, 0, 1.0])
        sol = build_adjoint_cgo(background16, cfg, a_hat, b_hat)
        assert sol.kind == ADJOINT
        kappa = np.sqrt(background16.k0_sq)
        L_hat = adjoint_principal(cfg.zeta, a_hat, b_hat)
        expected = -np.conj(kappa) * L_hat.reshape(8, 1, 1, 1)
        np.testing.assert_allclose(sol.S, np.broadcast_to(expected, sol.S.shape), atol=1e-12)
        assert sol.diagnostics['adjoint_residual'] < 1e-9

    def test_dump(self, background16, tmp_path):
        cfg = FaddeevConfig(zeta=axis_zeta(12.0), k0_sq=background16.k0_sq)
        sol = build_maxwell_cgo(background16, cfg, [0, 1.0, 0], [0, 0, 0])
        paths = write_cgo_dump(sol, tmp_path)
        grid, values, kind = read_field(paths['Z'])
        assert kind == 'state8'
        np.testing.assert_allclose(values, np.broadcast_to(sol.Z_envelope, values.shape))
        assert paths['diagnostics'].exists()


def decay_slope(moduli, values) -> float:
    return float(np.polyfit(np.log(moduli), np.log(values), 1)[0])


class TestDecayRates:
    MODULI = (8.0, 16.0, 32.0, 64.0)

    def test_green_operator_rate(self, grid16):
        f = np.exp(-grid16.radius_sq).astype(complex)
        ratios = [gzeta_norm_ratio(FaddeevConfig(zeta=axis_zeta(z), k0_sq=1.0), f, grid16)
                  for z in self.MODULI]
        assert -1.3 <= decay_slope(self.MODULI, ratios) <= -0.7

    def test_remainder_rate(self, bumped16):
        Q = assemble_Q(derive_scalars(bumped16))
        L = np.ones(8) / np.sqrt(8.0)
        norms = []
        for z in self.MODULI:
            cfg = FaddeevConfig(zeta=axis_zeta(z, bumped16.k0_sq), k0_sq=bumped16.k0_sq)
            R, _ = solve_remainder(Q, cfg, L)
            norms.append(weighted_norm(R, cfg.delta))
        assert -1.3 <= decay_slope(self.MODULI, norms) <= -0.7

    def test_adjoint_correction_rate(self, bumped16):
        norms = []
        for z in self.MODULI:
            cfg = FaddeevConfig(zeta=axis_zeta(z, bumped16.k0_sq), k0_sq=bumped16.k0_sq)
            sol = build_adjoint_cgo(bumped16, cfg, [0, 1.0, 0], [0, 0, 1.0])
            norms.append(sol.diagnostics['s_norm'])
        assert -1.3 <= decay_slope(self.MODULI, norms) <= -0.7
