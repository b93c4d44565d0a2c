#!/usr/bin/env python
"""
CGO Maxwell stability lab

Synthesizes coefficient pairs, generates boundary Cauchy data, measures the
distance between Cauchy sets, builds CGO solutions, recovers the coefficient
difference from boundary pairings and checks the Carleman estimate.

Usage:
    python main.py synth --spec bumps.json --out runs/c1
    python main.py forward --coeff runs/c1/coeff.json --probes 48 --out runs/cs1
    python main.py distance --a runs/cs1 --b runs/cs2
    python main.py cgo --coeff runs/c1/coeff.json --xi 1 0 0 --tau 8 --out runs/cgo
    python main.py recover --coeff1 runs/c1/coeff.json --coeff2 runs/c2/coeff.json --out runs/rec
    python main.py curve --coeff runs/c1/coeff.json --amplitudes 8 --out runs/curve
    python main.py carleman --out runs/carleman
    python main.py report --csv runs/curve/curve.csv --out runs/report
    python main.py stats                 # Show run database statistics

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 I/O error, 130 interrupted.
"""

import argparse
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional
import logging

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from src import __version__
from src.carleman.estimate import (CarlemanConfig, carleman_sweep, fit_constant,
                                   random_test_functions, write_carleman_csv)
from src.cgo.builders import build_adjoint_cgo, build_maxwell_cgo, write_cgo_dump
from src.coefficients.admissibility import check_admissible
from src.coefficients.pair import CoefficientPair, synth_coefficients
from src.database.run_store import RunManifest, RunStore, write_manifest
from src.forward.cauchy import (NORMALIZE_T, NORMALIZE_TS, admittance_difference_norm, delta_C,
                                generate_cauchy_set, read_cauchy_set, write_cauchy_set)
from src.grid.field_io import write_field
from src.grid.grid import Grid3
from src.recovery.curve import amplitude_sweep, stability_curve, write_curve_csv
from src.recovery.elliptic import invert_and_solve, write_recovery_report
from src.recovery.extraction import extract_fg_hat
from src.recovery.pairing import ALPHA, MODES, faddeev_config, polarizations
from src.recovery.zeta import RecoveryConfig, make_zeta_pair
from src.reports.summary import ReportBuilder
from src.utils.exceptions import ConfigError, NumericFailure
from src.utils.helpers import (config_hash, config_section, ensure_directories, load_config,
                               read_json, setup_logging, write_json)

COEFF_FILE = "coeff.json"


def build_grid(args, config: dict) -> Grid3:
    """Grid from the command line, falling back to the grid section."""
    section = config_section(config, 'grid')
    n = args.grid_n if args.grid_n is not None else int(section.get('n', 32))
    L = args.box_L if args.box_L is not None else float(section.get('L', 2.0))
    a = args.omega_a if args.omega_a is not None else float(section.get('a', 1.0))
    return Grid3(n, L, a)


def threads(args, config: dict) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(config_section(config, 'runtime').get('threads', 1)))


def seed(args, config: dict) -> Optional[int]:
    if args.seed is not None:
        return args.seed
    return config_section(config, 'runtime').get('seed', 0)


def load_pair(path) -> CoefficientPair:
    """Rebuild a coefficient pair from the coeff.json written by synth."""
    path = Path(path)
    if path.is_dir():
        path = path / COEFF_FILE
    data = read_json(path)
    try:
        g = data['grid']
        grid = Grid3(int(g['n']), float(g['L']), float(g['a']))
        spec = data['spec']
    except (KeyError, TypeError) as e:
        raise ConfigError(f"Coefficient file {path} lacks grid or spec: {e}") from e
    return synth_coefficients(grid, spec)


def output_dir(args, command: str) -> Path:
    out = Path(args.out) if args.out else Path("runs") / command
    out.mkdir(parents=True, exist_ok=True)
    return out


# =============================================================================
# Commands
# =============================================================================

def cmd_synth(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    grid = build_grid(args, config)
    spec = read_json(args.spec) if args.spec else dict(config_section(config, 'coefficients'))
    pair = synth_coefficients(grid, spec)
    report = check_admissible(pair)
    if not report.passed:
        logger.warning(f"Coefficient pair is not admissible: {report.measured}")

    out = output_dir(args, 'synth')
    outputs = [
        write_field(out / "gamma.cgof", grid, pair.gamma, 'scalar'),
        write_field(out / "mu.cgof", grid, pair.mu.astype(complex), 'scalar'),
    ]
    coeff = out / COEFF_FILE
    write_json(coeff, {'grid': grid.describe(), 'spec': spec, 'admissibility': report.to_dict()})
    outputs.append(coeff)
    logger.info(f"Coefficient pair written to {out}")
    return {'out': out, 'inputs': [args.spec] if args.spec else [], 'outputs': outputs,
            'hashed': {'grid': grid.describe(), 'spec': spec}}


def cmd_forward(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    pair = load_pair(args.coeff)
    probes = args.probes or int(config_section(config, 'forward').get('probes', 48))
    provenance = {'coeff': str(args.coeff), 'spec_hash': config_hash(pair.spec)}
    cs = generate_cauchy_set(pair, probes, threads(args, config), provenance,
                             show_progress=args.verbose)
    out = output_dir(args, 'forward')
    outputs = write_cauchy_set(cs, out)
    logger.info(f"Cauchy set with {len(cs)} data written to {out}")
    return {'out': out, 'inputs': [args.coeff], 'outputs': outputs,
            'hashed': {'spec': pair.spec, 'probes': probes}}


def cmd_distance(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    first = read_cauchy_set(args.a)
    second = read_cauchy_set(args.b)
    normalize = args.normalize or config_section(config, 'forward').get('normalize', NORMALIZE_T)
    delta = delta_C(first, second, normalize)
    print(f"delta_C = {delta:.6e}")
    result = {'delta_c': delta, 'normalize': normalize}
    if args.admittance:
        result['admittance_difference'] = admittance_difference_norm(first, second, seed=seed(args, config) or 0)
        print(f"||Lambda_1 - Lambda_2|| on probe span = {result['admittance_difference']:.6e}")

    outputs = []
    if args.out:
        out = output_dir(args, 'distance')
        path = out / "distance.json"
        write_json(path, result)
        outputs.append(path)
    else:
        out = None
    return {'out': out, 'inputs': [args.a, args.b], 'outputs': outputs, 'hashed': result}


def cmd_cgo(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    pair = load_pair(args.coeff)
    cfg = RecoveryConfig.from_config(config, tau=args.tau)
    zp = make_zeta_pair(pair.grid.lattice_vector(tuple(args.xi)), cfg.tau, pair.k0_sq)
    a1, b1, a_hat, b_hat = polarizations(zp, args.mode)

    out = output_dir(args, 'cgo')
    sol = build_maxwell_cgo(pair, faddeev_config(zp.zeta1, pair.k0_sq, cfg), a1, b1,
                            fixed_point=cfg.fixed_point)
    adj = build_adjoint_cgo(pair, faddeev_config(zp.zeta2, pair.k0_sq, cfg), a_hat, b_hat,
                            fixed_point=cfg.fixed_point)
    outputs = list(write_cgo_dump(sol, out / "maxwell").values())
    outputs += list(write_cgo_dump(adj, out / "adjoint").values())
    zeta_path = out / "zeta.json"
    write_json(zeta_path, zp.to_dict())
    outputs.append(zeta_path)
    logger.info(f"Maxwell residual {sol.diagnostics['maxwell_residual']:.3e}, "
                f"adjoint residual {adj.diagnostics['adjoint_residual']:.3e}")
    return {'out': out, 'inputs': [args.coeff], 'outputs': outputs,
            'hashed': {'spec': pair.spec, 'xi': args.xi, 'tau': cfg.tau, 'mode': args.mode}}


def cmd_recover(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    c1 = load_pair(args.coeff1)
    c2 = load_pair(args.coeff2)
    c1.grid.check_same(c2.grid)
    rcut = None if args.rcut in (None, 'auto') else float(args.rcut)
    cfg = RecoveryConfig.from_config(config, tau=args.tau, threads=threads(args, config))
    if args.rcut is not None:
        cfg.rcut = rcut

    delta = None
    inputs = [args.coeff1, args.coeff2]
    if args.cauchy1 and args.cauchy2:
        delta = delta_C(read_cauchy_set(args.cauchy1), read_cauchy_set(args.cauchy2))
        inputs += [args.cauchy1, args.cauchy2]
        logger.info(f"delta_C = {delta:.3e}")

    f_hat, g_hat = extract_fg_hat(c1, c2, cfg, show_progress=args.verbose)
    report = invert_and_solve(f_hat, g_hat, c1, c2, cfg, delta_c=delta)
    out = output_dir(args, 'recover')
    outputs = write_recovery_report(report, out, c1.grid)
    print(f"H1 error of gamma2/mu2 recovery: {report.h1_errors['gamma2']:.4e} / "
          f"{report.h1_errors['mu2']:.4e}")
    return {'out': out, 'inputs': inputs, 'outputs': outputs,
            'hashed': {'spec1': c1.spec, 'spec2': c2.spec, 'tau': cfg.tau, 'rcut': cfg.rcut}}


def cmd_curve(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    base = load_pair(args.coeff)
    cfg = RecoveryConfig.from_config(config, threads=threads(args, config))
    probes = args.probes or int(config_section(config, 'forward').get('probes', 48))
    specs = amplitude_sweep(base.spec, args.amplitudes, args.amp_min, args.amp_max,
                            radius=base.grid.a / 2.0)
    perturbations = [synth_coefficients(base.grid, s) for s in specs]
    labels = [f"amp{i}" for i in range(len(specs))]
    curve = stability_curve(base, perturbations, cfg, probes, labels, show_progress=args.verbose)

    out = output_dir(args, 'curve')
    csv_path = write_curve_csv(curve, out / "curve.csv")
    json_path = out / "curve.json"
    write_json(json_path, curve.to_dict())
    print(f"Fitted lambda = {curve.lambda_fit:.4f} (Spearman {curve.spearman:.3f}, "
          f"c = {curve.c_geometry:.3f})")
    return {'out': out, 'inputs': [args.coeff], 'outputs': [csv_path, json_path],
            'hashed': {'spec': base.spec, 'amplitudes': [args.amplitudes, args.amp_min, args.amp_max],
                       'probes': probes}}


def cmd_carleman(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    grid = build_grid(args, config)
    section = config_section(config, 'carleman')
    h_values = args.h or section.get('h_values', [0.05, 0.1, 0.2, 0.3])
    cfg = CarlemanConfig(grid, x0=args.x0 or section.get('x0'), h_values=tuple(float(h) for h in h_values))
    count = args.functions or int(section.get('test_functions', 8))

    results = []
    for u in random_test_functions(grid, count, seed(args, config)):
        results.extend(carleman_sweep(u, cfg, threads(args, config)))
    fit = fit_constant(results)

    out = output_dir(args, 'carleman')
    csv_path = write_carleman_csv(results, out / "carleman.csv")
    json_path = out / "carleman.json"
    write_json(json_path, {'fit': fit, 'x0': cfg.x0, 'd1': cfg.d1, 'd2': cfg.d2,
                           'h_values': list(cfg.h_values), 'test_functions': count})
    print(f"Carleman constant C = {fit['C']:.4e} (median {fit['median']:.4e}, "
          f"spread {fit['spread']:.2f})")
    return {'out': out, 'inputs': [], 'outputs': [csv_path, json_path],
            'hashed': {'grid': grid.describe(), 'x0': cfg.x0, 'h': list(cfg.h_values), 'count': count}}


def cmd_report(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    for path in args.csv:
        if not Path(path).exists():
            raise FileNotFoundError(f"Curve CSV not found: {path}")
    out = output_dir(args, 'report')
    outputs = ReportBuilder(config).build(args.csv, out)
    logger.info(f"Report written to {out}")
    return {'out': out, 'inputs': list(args.csv), 'outputs': outputs, 'hashed': {'csv': list(args.csv)}}


def cmd_stats(args, config: dict, logger: logging.Logger) -> Dict[str, Any]:
    with RunStore(config_section(config, 'output').get('database_path')) as store:
        stats = store.get_stats()
        print("\nRun Database Statistics:")
        print("-" * 40)
        for key, value in stats.items():
            print(f"  {key.replace('_', ' ').title()}: {value}")
    return {}


HANDLERS = {
    'synth': cmd_synth,
    'forward': cmd_forward,
    'distance': cmd_distance,
    'cgo': cmd_cgo,
    'recover': cmd_recover,
    'curve': cmd_curve,
    'carleman': cmd_carleman,
    'report': cmd_report,
    'stats': cmd_stats,
}


def record(command: str, result: Dict[str, Any], args, config: dict, wall_time: float,
           logger: logging.Logger):
    """Write the directory manifest and register the run."""
    if not result or result.get('out') is None:
        return
    manifest = RunManifest(
        command=command,
        config_hash=config_hash({'config': config, 'run': result.get('hashed', {})}),
        seed=seed(args, config),
        version=__version__,
        wall_time=wall_time,
        inputs=[str(p) for p in result.get('inputs', [])],
        outputs=[str(p) for p in result.get('outputs', [])],
    )
    write_manifest(result['out'], manifest)
    with RunStore(config_section(config, 'output').get('database_path')) as store:
        run_id = store.record_run(manifest, result['out'])
    logger.info(f"Run recorded as {run_id}")


def record_failure(command: str, error: BaseException, args, config: dict, wall_time: float,
                   logger: logging.Logger):
    """Register a failed run; the manifest is written only when --out names a directory."""
    if command == 'stats':
        return
    try:
        manifest = RunManifest(
            command=command,
            config_hash=config_hash({'config': config, 'error': type(error).__name__}),
            seed=seed(args, config),
            version=__version__,
            wall_time=wall_time,
            status='failed',
        )
        out = getattr(args, 'out', None)
        if out:
            Path(out).mkdir(parents=True, exist_ok=True)
            write_manifest(out, manifest)
        with RunStore(config_section(config, 'output').get('database_path')) as store:
            store.record_run(manifest, out or '')
    except Exception as e:
        logger.warning(f"Could not record failed run: {e}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='CGO Maxwell stability lab',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__
    )
    parser.add_argument('--grid-n', type=int, help='Grid nodes per axis (even)')
    parser.add_argument('--box-L', type=float, help='Half width of the periodic box')
    parser.add_argument('--omega-a', type=float, help='Half width of the cube Omega')
    parser.add_argument('--threads', type=int, help='Worker threads for sweeps')
    parser.add_argument('--seed', type=int, help='Random seed')
    parser.add_argument('--out', help='Output directory')
    parser.add_argument('--config', help='YAML config file (default: config/settings.yaml)')
    parser.add_argument('--verbose', '-v', action='store_true',
                        help='Enable verbose logging and progress bars')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('synth', help='Synthesize a coefficient pair')
    p.add_argument('--spec', help='JSON coefficient spec (default: coefficients config section)')

    p = sub.add_parser('forward', help='Generate a Cauchy set')
    p.add_argument('--coeff', required=True, help='coeff.json written by synth')
    p.add_argument('--probes', type=int, help='Number of plane-wave probes (even)')

    p = sub.add_parser('distance', help='Distance delta_C between two Cauchy sets')
    p.add_argument('--a', required=True, help='First Cauchy set directory')
    p.add_argument('--b', required=True, help='Second Cauchy set directory')
    p.add_argument('--normalize', choices=[NORMALIZE_T, NORMALIZE_TS])
    p.add_argument('--admittance', action='store_true',
                   help='Also estimate the admittance difference on the probe span')

    p = sub.add_parser('cgo', help='Build a Maxwell CGO and its adjoint partner')
    p.add_argument('--coeff', required=True)
    p.add_argument('--xi', type=int, nargs=3, default=[1, 0, 0], help='Lattice index of xi')
    p.add_argument('--tau', type=float)
    p.add_argument('--mode', choices=list(MODES), default=ALPHA)

    p = sub.add_parser('recover', help='Recover the second pair from boundary pairings')
    p.add_argument('--coeff1', required=True)
    p.add_argument('--coeff2', required=True)
    p.add_argument('--tau', type=float)
    p.add_argument('--rcut', help="Fourier cutoff radius or 'auto'")
    p.add_argument('--cauchy1', help='Cauchy set of the first pair, for delta_C')
    p.add_argument('--cauchy2', help='Cauchy set of the second pair, for delta_C')

    p = sub.add_parser('curve', help='Stability curve over an amplitude sweep')
    p.add_argument('--coeff', required=True, help='Base pair')
    p.add_argument('--amplitudes', type=int, default=8)
    p.add_argument('--amp-min', type=float, default=1e-3)
    p.add_argument('--amp-max', type=float, default=3e-2)
    p.add_argument('--probes', type=int)

    p = sub.add_parser('carleman', help='Carleman ratio sweep over random test functions')
    p.add_argument('--h', type=float, nargs='+', help='Semiclassical parameters in (0, 1]')
    p.add_argument('--x0', type=float, nargs=3, help='Weight center outside the cube')
    p.add_argument('--functions', type=int, help='Number of random test functions')

    p = sub.add_parser('report', help='SVG plot and HTML summary of curve CSVs')
    p.add_argument('--csv', nargs='+', required=True)

    sub.add_parser('stats', help='Show run database statistics')
    return parser


def main(argv: List[str] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)

    # Setup
    ensure_directories()
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as e:
        print(f"Failed to load config: {e}", file=sys.stderr)
        return 2

    output = config_section(config, 'output')
    log_level = logging.DEBUG if args.verbose else None
    logger = setup_logging(output.get('log_file'), level=log_level)

    logger.info("=" * 60)
    logger.info(f"CGO Maxwell stability lab: {args.command}")
    logger.info(f"Started at: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    logger.info("=" * 60)

    started = time.perf_counter()
    try:
        result = HANDLERS[args.command](args, config, logger)
        record(args.command, result, args, config, time.perf_counter() - started, logger)
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        return 130
    except Exception as e:
        record_failure(args.command, e, args, config, time.perf_counter() - started, logger)
        if isinstance(e, NumericFailure):
            logger.error(f"Numeric failure: {e}")
            return 3
        if isinstance(e, ValueError):
            logger.error(f"Configuration error: {e}")
            return 2
        if isinstance(e, OSError):
            logger.error(f"I/O error: {e}")
            return 4
        logger.exception(f"Unexpected error: {e}")
        return 1

    logger.info("=" * 60)
    logger.info(f"{args.command} completed successfully!")
    logger.info(f"Finished at: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    logger.info("=" * 60)
    return 0


if __name__ == '__main__':
    sys.exit(main())
