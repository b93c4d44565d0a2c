import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.coefficients.pair import synth_coefficients
from src.recovery.curve import (CurvePoint, StabilityCurve, amplitude_sweep, fit_lambda,
                                geometry_constant, read_curve_csv, stability_curve, tau_from_delta,
                                write_curve_csv)
from src.recovery import extraction
from src.recovery.elliptic import (exact_discrete_fg, h1_norm, invert_and_solve, recover_from_fg,
                                   true_differences, write_recovery_report)
from src.recovery.extraction import (AXIS_OFFSETS, FourierSamples, extract_fg_hat, interpolation_check,
                                     lattice_indices, tail_check, zero_mode)
from src.recovery.pairing import ALPHA, BETA, oracle_hat, pairing_q_diff, polarizations, q_difference
from src.recovery.zeta import RecoveryConfig, make_zeta_pair, modulus_of_continuity
from src.utils.exceptions import ConfigError, NumericFailure
from tests.conftest import bump_spec

lattice_xi = st.tuples(*[st.integers(-4, 4)] * 3).filter(any)


class TestZetaPair:
    @given(index=lattice_xi, tau=st.floats(1.0, 50.0), k0_sq=st.floats(0.1, 4.0))
    @settings(max_examples=60, deadline=None)
    def test_identities(self, index, tau, k0_sq):
        xi = (np.pi / 2.0) * np.asarray(index, dtype=float)
        zp = make_zeta_pair(xi, tau, k0_sq)
        np.testing.assert_allclose(zp.zeta1 - np.conj(zp.zeta2), -xi, atol=1e-9)
        for z in (zp.zeta1, zp.zeta2):
            assert abs(np.dot(z, z) - k0_sq) < 1e-9 * (1 + tau ** 2)
        assert zp.modulus ** 2 == pytest.approx(2 * tau ** 2 + np.dot(xi, xi) / 2 + k0_sq)
        assert abs(np.dot(zp.eta1, xi)) < 1e-9 and abs(np.dot(zp.eta2, xi)) < 1e-9

    def test_zero_xi(self):
        with pytest.raises(ValueError):
            make_zeta_pair([0.0, 0.0, 0.0], 5.0, 1.0)

    def test_small_tau(self):
        with pytest.raises(ValueError):
            make_zeta_pair([1.0, 0.0, 0.0], 0.5, 1.0)

    def test_polarizations_are_normalized(self):
        zp = make_zeta_pair([np.pi / 2, 0.0, 0.0], 3.0, 1.0)
        a1, b1, a_hat, b_hat = polarizations(zp, ALPHA)
        w = (1j * zp.eta1 + zp.eta2) / np.sqrt(2.0)
        assert np.dot(w, a1) == pytest.approx(1.0)
        assert np.dot(w, np.conj(a_hat)) == pytest.approx(1.0)
        assert not np.any(b1) and not np.any(b_hat)
        with pytest.raises(ValueError):
            polarizations(zp, "gamma")


class TestRecoveryConfig:
    def test_from_config_auto_cutoff(self):
        cfg = RecoveryConfig.from_config({'recovery': {'tau': 8.0, 'rcut': 'auto'},
                                          'runtime': {'threads': 3}})
        assert cfg.rcut is None
        assert cfg.cutoff() == pytest.approx(4.0)
        assert cfg.threads == 3

    def test_explicit_cutoff_and_override(self):
        cfg = RecoveryConfig.from_config({'recovery': {'rcut': 2.5}}, tau=12.0)
        assert cfg.cutoff() == 2.5
        assert cfg.tau == 12.0

    def test_theta(self):
        cfg = RecoveryConfig(s1=-0.5, s2=0.25)
        assert cfg.theta * cfg.s1 + (1 - cfg.theta) * cfg.s2 == pytest.approx(0.0)

    @pytest.mark.parametrize("kwargs", [
        {'tau': 0.5}, {'s1': 0.1}, {'s2': 0.6}, {'rcut': -1.0}, {'abort_fraction': 1.0},
        {'modulus': 'log'},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            RecoveryConfig(**kwargs)

    def test_moduli(self):
        assert modulus_of_continuity("identity")(0.25) == 0.25
        assert modulus_of_continuity("sqrt")(0.25) == pytest.approx(0.5)


class TestPairing:
    def test_identical_pairs_give_zero(self, background16):
        zp = make_zeta_pair(background16.grid.lattice_vector((1, 0, 0)), 2.0, background16.k0_sq)
        for mode in (ALPHA, BETA):
            assert pairing_q_diff(background16, background16, zp, mode) == 0

    def test_oracle_of_identical_pairs(self, bumped16):
        assert oracle_hat(bumped16, bumped16, [np.pi / 2, 0, 0]) == 0

    def test_approaches_oracle_as_tau_grows(self, bumped16, background16):
        xi = bumped16.grid.lattice_vector((1, 0, 0))
        exact = oracle_hat(bumped16, background16, xi, ALPHA)
        deviation = {}
        for tau in (2.0, 8.0):
            zp = make_zeta_pair(xi, tau, bumped16.k0_sq)
            deviation[tau] = abs(pairing_q_diff(bumped16, background16, zp, ALPHA) - exact)
        assert deviation[2.0] < 0.25 * abs(exact)
        assert deviation[8.0] < 0.5 * deviation[2.0]

    def test_real_coefficients_give_hermitian_samples(self, bumped16, background16):
        xi = bumped16.grid.lattice_vector((1, 0, 0))
        plus = pairing_q_diff(bumped16, background16, make_zeta_pair(xi, 8.0, bumped16.k0_sq))
        minus = pairing_q_diff(bumped16, background16, make_zeta_pair(-xi, 8.0, bumped16.k0_sq))
        assert abs(plus - np.conj(minus)) < 0.2 * abs(plus)

    def test_frequency_mismatch(self, grid16):
        c1 = synth_coefficients(grid16, bump_spec())
        c2 = synth_coefficients(grid16, bump_spec(omega=2.0))
        with pytest.raises(ValueError):
            oracle_hat(c1, c2, [np.pi / 2, 0, 0])


class TestLattice:
    def test_indices_exclude_zero(self, grid16):
        indices = lattice_indices(grid16, np.pi / 2 * 1.2)
        assert (0, 0, 0) not in indices
        assert set(indices) == set(AXIS_OFFSETS)

    def test_indices_respect_cutoff(self, grid16):
        rcut = 3.0
        for index in lattice_indices(grid16, rcut):
            assert np.linalg.norm(grid16.lattice_vector(index)) <= rcut + 1e-12

    def test_zero_mode_extrapolation(self):
        samples = {}
        for o in AXIS_OFFSETS:
            samples[o] = 2.0 + 0.5 + 1j
            samples[tuple(2 * v for v in o)] = 2.0 + 0.5 * 4 + 1j
        assert zero_mode(samples) == pytest.approx(2.0 + 1j)

    def test_zero_mode_skips_missing_offsets(self):
        samples = {o: 3.0 for o in AXIS_OFFSETS[1:]}
        samples.update({tuple(2 * v for v in o): 6.0 for o in AXIS_OFFSETS})
        assert zero_mode(samples) == pytest.approx(2.0)

    def test_zero_mode_needs_both_rings(self):
        with pytest.raises(NumericFailure):
            zero_mode({o: 1.0 for o in AXIS_OFFSETS})

    def test_inverse_of_single_mode(self, grid16):
        samples = FourierSamples(grid16, 2.0, {(1, 0, 0): 1.0 + 0j})
        xi = grid16.lattice_vector((1, 0, 0))
        expected = np.exp(1j * np.tensordot(xi, grid16.coords, axes=1)) / (2 * grid16.L) ** 3
        np.testing.assert_allclose(samples.inverse(), expected, atol=1e-12)

    def test_inverse_of_zero_mode(self, grid16):
        samples = FourierSamples(grid16, 2.0, {(0, 0, 0): 64.0})
        np.testing.assert_allclose(samples.inverse(), 1.0, atol=1e-12)


class TestNormChecks:
    @pytest.fixture
    def smooth(self, grid16):
        rng = np.random.default_rng(4)
        return np.exp(-grid16.radius_sq) * (1 + 0.1 * rng.standard_normal(grid16.shape))

    def test_interpolation_inequality(self, smooth, grid16):
        out = interpolation_check(smooth, grid16, -0.5, 0.45)
        assert out['ratio'] <= 1 + 1e-9

    @pytest.mark.parametrize("R", [1.0, 2.0, 4.0])
    def test_tail_bound(self, smooth, grid16, R):
        out = tail_check(smooth, grid16, R, 0.45)
        assert out['ratio'] <= 1 + 1e-9

    def test_zero_field(self, grid16):
        assert interpolation_check(np.zeros(grid16.shape), grid16, -0.5, 0.45)['ratio'] == 0.0


class TestEllipticRecovery:
    def test_exact_data_recovers_differences(self, bumped16, background16):
        f, g = exact_discrete_fg(bumped16, background16)
        report = recover_from_fg(f, g, bumped16, background16, RecoveryConfig())
        assert report.h1_errors['phi1'] < 1e-3
        assert report.h1_errors['phi2'] < 1e-3
        assert report.negative_mu_nodes == 0
        assert report.h1_errors['mu2'] < 1e-3 * h1_norm(background16.mu, background16.grid)

    def test_identical_pairs(self, bumped16):
        zero = np.zeros(bumped16.grid.shape, dtype=complex)
        report = recover_from_fg(zero, zero, bumped16, bumped16, RecoveryConfig())
        assert np.abs(report.phi1).max() == 0
        assert np.abs(report.phi2).max() == 0
        assert report.h1_errors['difference'] == pytest.approx(0.0, abs=1e-12)

    def test_true_differences(self, bumped16):
        phi1, phi2 = true_differences(bumped16, bumped16)
        assert not np.any(phi1) and not np.any(phi2)

    def test_write_report(self, bumped16, background16, tmp_path):
        f, g = exact_discrete_fg(bumped16, background16)
        report = recover_from_fg(f, g, bumped16, background16, RecoveryConfig(), delta_c=0.1)
        paths = write_recovery_report(report, tmp_path, bumped16.grid)
        assert sorted(p.name for p in paths) == ['f.cgof', 'g.cgof', 'phi1.cgof', 'phi2.cgof',
                                                 'report.json']


class TestStabilityCurve:
    def test_tau_from_delta(self):
        assert tau_from_delta(math.exp(-20.0), 1.0) == pytest.approx(10.0)
        assert tau_from_delta(0.0, 1.0) == 50.0
        assert tau_from_delta(0.9, 1.0) == 1.0

    def test_fit_recovers_exponent(self):
        deltas = np.geomspace(1e-8, 1e-2, 6)
        errors = 3.0 * np.abs(np.log(deltas)) ** -0.7
        fit = fit_lambda(deltas, errors)
        assert fit['lambda'] == pytest.approx(0.7)
        assert fit['log_C'] == pytest.approx(math.log(3.0))
        assert fit['points'] == 6

    def test_fit_skips_unusable_points(self):
        fit = fit_lambda([0.0, 1e-3, 2.0], [0.1, 0.2, float('nan')])
        assert fit['points'] == 1
        assert math.isnan(fit['lambda'])

    def test_csv(self, tmp_path):
        curve = StabilityCurve([CurvePoint('p0', 1e-3, 4.0, 0.2), CurvePoint('p1', 1e-5, 6.0, 0.1)],
                               lambda_fit=0.5, c_geometry=1.7)
        rows = read_curve_csv(write_curve_csv(curve, tmp_path / "curve.csv"))
        assert rows[1] == {'delta_c': 1e-5, 'h1_error': 0.1, 'tau': 6.0, 'lambda_fit': 0.5}

    def test_amplitude_sweep(self):
        base = bump_spec(amplitude=0.0, eps0=2.0)
        specs = amplitude_sweep(base, count=4, low=1e-3, high=1e-2)
        assert len(specs) == 4
        amplitudes = [s['gamma_bumps'][-1]['amplitude_re'] for s in specs]
        np.testing.assert_allclose(amplitudes, 2.0 * np.geomspace(1e-3, 1e-2, 4))
        assert base['gamma_bumps'] == []

    @pytest.mark.parametrize("kwargs", [{'count': 0}, {'low': 0.0}, {'low': 0.1, 'high': 0.01},
                                        {'target': 'sigma_bumps'}])
    def test_bad_sweep(self, kwargs):
        with pytest.raises(ValueError):
            amplitude_sweep(bump_spec(), **kwargs)

    def test_geometry_constant_is_cube_half_width(self, grid16):
        assert geometry_constant(grid16, 1.0) == pytest.approx(grid16.face_half_width, rel=1e-2)

    def test_curve_over_amplitude_sweep(self, background16):
        perts = [synth_coefficients(background16.grid, bump_spec(amplitude=a))
                 for a in (0.02, 0.06, 0.2)]
        cfg = RecoveryConfig(tau=2.0, rcut=np.pi / 2 * 1.2, abort_fraction=0.5)
        curve = stability_curve(background16, perts, cfg, probes=2, tau_range=(2.0, 50.0))
        assert not any(p.failed for p in curve.points)
        deltas = [p.delta_c for p in curve.points]
        assert deltas == sorted(deltas)
        assert curve.lambda_fit > 0


class TestPipelineOnIdenticalPairs:
    def test_extraction_and_inversion(self, background16):
        cfg = RecoveryConfig(tau=2.0, rcut=np.pi / 2 * 1.2)
        f_hat, g_hat = extract_fg_hat(background16, background16, cfg)
        assert len(f_hat.values) == 7
        assert f_hat.max_abs() == 0 and g_hat.max_abs() == 0
        assert f_hat.failed == []
        report = invert_and_solve(f_hat, g_hat, background16, background16, cfg)
        assert np.abs(report.phi1).max() == 0
        assert report.diagnostics['modes'] == 7

    def test_curve_point_without_data_gap(self, background16):
        cfg = RecoveryConfig(tau=2.0)
        curve = stability_curve(background16, [background16], cfg, probes=2, labels=['same'])
        point = curve.points[0]
        assert point.label == 'same'
        assert point.delta_c < 1e-10
        assert point.h1_error == 0.0
        assert 1.0 <= point.tau <= 50.0
        assert math.isnan(curve.lambda_fit)


class TestExtraction:
    RCUT = np.pi / 2 * 1.2

    def test_failed_mode_is_left_out(self, monkeypatch, background16):
        c1 = synth_coefficients(background16.grid, bump_spec(amplitude=0.2))
        cfg = RecoveryConfig(tau=2.0, rcut=self.RCUT, abort_fraction=0.2)
        reference, _ = extract_fg_hat(c1, background16, cfg)
        lost = background16.grid.lattice_vector((1, 0, 0))

        def failing(c1, c2, zp, mode, *args):
            if np.allclose(zp.xi, lost):
                raise NumericFailure("mode lost")
            return pairing_q_diff(c1, c2, zp, mode, *args)

        monkeypatch.setattr(extraction, 'pairing_q_diff', failing)
        f_hat, g_hat = extract_fg_hat(c1, background16, cfg)
        assert f_hat.failed == [(1, 0, 0)]
        assert (1, 0, 0) not in f_hat.values and (1, 0, 0) not in g_hat.values
        zero = f_hat.values[(0, 0, 0)]
        assert abs(zero - reference.values[(0, 0, 0)]) < 0.05 * abs(reference.values[(0, 0, 0)])

    def test_too_many_failures_abort(self, monkeypatch, background16):
        def failing(*args):
            raise NumericFailure("mode lost")

        monkeypatch.setattr(extraction, 'pairing_q_diff', failing)
        with pytest.raises(NumericFailure):
            extract_fg_hat(background16, background16, RecoveryConfig(tau=2.0, rcut=self.RCUT))

    def test_recovery_error_falls_with_tau(self, bumped16, background16):
        grid = bumped16.grid
        dQ = q_difference(bumped16, background16)
        indices = lattice_indices(grid, self.RCUT)
        aux = list(AXIS_OFFSETS) + [tuple(2 * v for v in o) for o in AXIS_OFFSETS]
        exact = {}
        for mode in (ALPHA, BETA):
            values = {i: oracle_hat(bumped16, background16, grid.lattice_vector(i), mode, dQ)
                      for i in set(indices) | set(aux)}
            samples = FourierSamples(grid, self.RCUT, {i: values[i] for i in indices})
            samples.values[(0, 0, 0)] = zero_mode(values)
            exact[mode] = samples
        base_cfg = RecoveryConfig(tau=2.0, rcut=self.RCUT)
        target = invert_and_solve(exact[ALPHA], exact[BETA], bumped16, background16, base_cfg)

        errors = []
        for tau in (2.0, 8.0):
            cfg = base_cfg.with_tau(tau)
            f_hat, g_hat = extract_fg_hat(bumped16, background16, cfg)
            report = invert_and_solve(f_hat, g_hat, bumped16, background16, cfg)
            errors.append(h1_norm(report.phi1 - target.phi1, grid) +
                          h1_norm(report.phi2 - target.phi2, grid))
        assert errors[1] < errors[0]
