import argparse
import csv
import io
import json
import logging
from pathlib import Path
import sys

import numpy as np

from .checks import SUITES, run_suite
from .config import CONFIG_FILENAME, find_project_root, load_config, locate_config_path, render_run_template
from .correlators import efp, spin_correlator
from .errors import (
    ConfigError,
    ConvergenceError,
    DimensionCap,
    NoFermiBoundary,
    NonConvergence,
    PoleError,
)
from .models import OutputFormat, Regime, RunConfig
from .thermo_density import evaluate_density, solve_lieb

logger = logging.getLogger(__name__)

EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _number(value: float) -> str:
    return f'{value:.17g}'


def write_table(config: RunConfig, header: list[str], rows: list[list[float]]) -> None:
    """Emit rows as CSV or JSON to ``config.out`` or stdout."""
    if config.output_format == OutputFormat.JSON:
        payload = [dict(zip(header, (float(x) for x in row))) for row in rows]
        text = json.dumps(payload, indent=2) + '\n'
    else:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_number(float(x)) for x in row])
        text = buffer.getvalue()
    if config.out is None:
        sys.stdout.write(text)
    else:
        config.out.parent.mkdir(parents=True, exist_ok=True)
        config.out.write_text(text, encoding='utf-8')
        print(f'Results written to {config.out}', file=sys.stderr)


def handle_init(force: bool) -> None:
    """Write xxz-run.toml with the bundled defaults at the project root."""
    target_path = find_project_root() / CONFIG_FILENAME
    if target_path.exists():
        if not force:
            print(f'{target_path} exists; pass --force to replace it', file=sys.stderr)
            sys.exit(1)
        logger.warning('Replacing run config %s', target_path)
    target_path.write_text(render_run_template(), encoding='utf-8')
    print(f'Run config with bundled defaults written to {target_path}')


def _numerics(config: RunConfig) -> dict:
    return {
        'grid': config.grid,
        'lieb_grid': config.lieb_grid,
        'circle_points': config.circle_points,
        'threads': config.threads,
        'tail_tol': config.tail_tol,
        'dimension_cap': config.dimension_cap,
    }


def handle_efp(config: RunConfig) -> None:
    result = efp(config.m, config.model(), **_numerics(config))
    write_table(config, ['m', 'tau', 'err_est'], [[config.m, result.value.real, result.err_est]])


def handle_corr(config: RunConfig) -> None:
    result = spin_correlator(config.kind, config.distance, config.model(), **_numerics(config))
    write_table(
        config, ['distance', 'value', 'err_est'], [[config.distance, result.value.real, result.err_est]]
    )


def handle_density(config: RunConfig) -> None:
    params = config.model()
    profile = solve_lieb(params, config.lieb_grid, 1)
    if params.regime == Regime.MASSIVE:
        span = np.pi / 2
    elif profile.field_active:
        span = profile.lambda_F
    else:
        span = min(profile.lambda_F, 5.0)
    alpha = np.linspace(-span, span, config.points)
    rho = evaluate_density(profile, alpha) if span > 0 else np.zeros_like(alpha)
    if params.regime == Regime.MASSIVE and profile.field_active:
        rho = np.where(np.abs(alpha) <= profile.lambda_F, rho, 0.0)
    write_table(config, ['alpha', 'rho'], [[a, r] for a, r in zip(alpha, np.real(rho))])


def handle_verify(config: RunConfig, quiet: bool) -> None:
    if not run_suite(config.suite, config, quiet=quiet):
        sys.exit(EXIT_VERIFY_FAILED)


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--delta', type=float, help='Anisotropy Delta (> -1, != 1).')
    parser.add_argument('--h', type=float, help='Magnetic field h >= 0.')
    parser.add_argument('--grid', type=int, help='Quadrature points per integration variable.')
    parser.add_argument('--lieb-grid', type=int, help='Nystrom points for the density equations.')
    parser.add_argument('--circle-points', type=int, help='Points on residue circles.')
    parser.add_argument('--tail-tol', type=float, help='Truncation bound for infinite lines.')
    parser.add_argument('--dimension-cap', type=int, help='Largest number of integration variables.')
    parser.add_argument('--threads', type=int, help='Worker threads for quadrature (capped by XXZ_THREADS).')
    parser.add_argument('--format', dest='output_format', choices=['csv', 'json'], help='Output format.')
    parser.add_argument('--out', type=Path, help='Write results to this file instead of stdout.')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Ground-state correlation functions of the XXZ spin-1/2 chain.'
    )
    parser.add_argument(
        '-v',
        '--verbose',
        action='count',
        default=0,
        help='Log solver progress to stderr (-v info, -vv debug).',
    )
    parser.add_argument('--config', type=Path, help=f'Run configuration (default: {CONFIG_FILENAME}).')
    subparsers = parser.add_subparsers(dest='command', required=True)

    init_parser = subparsers.add_parser(
        'init', help=f'Write {CONFIG_FILENAME} with the bundled defaults at the project root.'
    )
    init_parser.add_argument(
        '--force',
        action='store_true',
        help='Replace an existing run config.',
    )

    efp_parser = subparsers.add_parser('efp', help='Emptiness formation probability tau(m).')
    _add_model_arguments(efp_parser)
    efp_parser.add_argument('--m', type=int, default=1, help='Number of consecutive sites.')

    corr_parser = subparsers.add_parser('corr', help='Two-point spin correlator.')
    _add_model_arguments(corr_parser)
    corr_parser.add_argument('--kind', choices=['zz', 'pm'], default='zz', help='zz or pm (sigma+ sigma-).')
    corr_parser.add_argument('--distance', type=int, default=1, help='Distance between the two spins.')

    density_parser = subparsers.add_parser('density', help='Ground-state root density rho_h.')
    _add_model_arguments(density_parser)
    density_parser.add_argument('--points', type=int, default=201, help='Number of output points.')

    verify_parser = subparsers.add_parser('verify', help='Run the verification batteries.')
    verify_parser.add_argument(
        '--suite',
        choices=['all', *SUITES],
        default='all',
        help='Which battery to run (default: all).',
    )
    verify_parser.add_argument('--seed', type=int, help='Seed of the random draws.')
    verify_parser.add_argument('--lieb-grid', type=int, help='Nystrom points for the density equations.')
    verify_parser.add_argument('--quiet', action='store_true', help='Only print failures and the summary.')

    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)
    logging.captureWarnings(True)


def _overrides(args: argparse.Namespace) -> dict:
    keys = (
        'delta',
        'h',
        'grid',
        'lieb_grid',
        'circle_points',
        'tail_tol',
        'dimension_cap',
        'threads',
        'output_format',
        'out',
        'm',
        'kind',
        'distance',
        'points',
        'suite',
        'seed',
    )
    return {key: getattr(args, key) for key in keys if hasattr(args, key)}


def main(argv: list[str] | None = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    if args.command == 'init':
        handle_init(force=args.force)
        return

    try:
        config_path = locate_config_path(args.config)
        config = load_config(args.command, config_path, _overrides(args))
    except (FileNotFoundError, ConfigError) as exc:
        print(f'Error: {exc}', file=sys.stderr)
        sys.exit(EXIT_CONFIG)
    for notice in config.notices:
        print(f'Notice: {notice}', file=sys.stderr)

    handlers = {
        'efp': lambda: handle_efp(config),
        'corr': lambda: handle_corr(config),
        'density': lambda: handle_density(config),
        'verify': lambda: handle_verify(config, quiet=args.quiet),
    }
    if args.command not in handlers:
        parser.error('Unknown command')
    try:
        handlers[args.command]()
    except (NonConvergence, ConvergenceError, NoFermiBoundary, PoleError) as exc:
        print(f'Error: {exc}', file=sys.stderr)
        sys.exit(EXIT_NUMERIC)
    except (ConfigError, DimensionCap, ValueError) as exc:
        print(f'Error: {exc}', file=sys.stderr)
        sys.exit(EXIT_CONFIG)


if __name__ == '__main__':
    main()
