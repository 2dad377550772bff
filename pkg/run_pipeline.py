#!/usr/bin/env python3
"""CLI script to run the black hole stability toolkit workflows."""

import json
import sys
from pathlib import Path
from typing import Dict, Optional

import click
from dotenv import load_dotenv

from src.config import RunConfig, emit_defaults, load_config, validate_config
from src.errors import ConfigError
from src.pipeline import StabilityPipeline

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

# flag name -> (config section, field)
OVERRIDES = {
    'mass': ('background', 'mass'),
    'spin': ('background', 'spin'),
}


def common_options(func):
    """Options shared by every subcommand."""
    func = click.option('--config', 'config_path', type=click.Path(dir_okay=False),
                        help='JSON RunConfig to start from (flags override it)')(func)
    func = click.option('--mass', type=float, help='Black hole mass (default 1)')(func)
    func = click.option('--json', 'json_path', type=click.Path(dir_okay=False),
                        help='Also write the report as JSON to this path')(func)
    func = click.option('--emit-defaults', is_flag=True,
                        help='Print the default configuration for this command and exit')(func)
    return func


def build_config(command: str, config_path: Optional[str], section: str, values: Dict) -> RunConfig:
    """Load or default a RunConfig and apply the flags that were given."""
    config = load_config(config_path) if config_path else RunConfig()
    config.command = command
    for key, value in values.items():
        if value is None:
            continue
        target, name = OVERRIDES.get(key, (section, key))
        current = getattr(config, target)
        if isinstance(value, tuple):
            value = list(value)
            if not value:
                continue
        setattr(current, name, value)
    return validate_config(config)


def print_report(result: Dict):
    """Display a human-readable table of the report."""
    report = result['report']
    kind = result['kind']

    print(f"\n📋 {kind} report (session {result['session_id']})")
    if kind == 'pairings':
        print(f"   {'name':<20} {'computed':>14} {'expected':>10} {'abs_error':>10}")
        for row in report['rows']:
            computed = row['computed']
            shown = f"{computed:14.6f}" if not isinstance(computed, list) else f"{computed[0]:.4f}{computed[1]:+.4f}i"
            mark = '✓' if row['passed'] else '✗'
            print(f"   {row['name']:<20} {shown:>14} {row['expected']:>10g} {row['abs_error']:>10.1e} {mark}")
    elif kind == 'verify':
        for row in report['rows']:
            order = row.get('order_estimate')
            extra = f", order {order:.2f}" if order is not None else ''
            print(f"   {row['entry']:<20} {row['operator']:<16} residual {row['residual']:.2e}{extra}")
    elif kind == 'scan':
        print(f"   {report['problem']}: min |W| = {report['min_normalized_wronskian']:.3e} "
              f"at {report['argmin'][0]:+.3f}{report['argmin'][1]:+.3f}i over {report['points']} points")
    elif kind == 'qnm':
        print(f"   sigma  = {report['sigma'][0]:.10f} {report['sigma'][1]:+.10f}i")
        print(f"   oracle = {report['oracle'][0]:.10f} {report['oracle'][1]:+.10f}i")
    elif kind == 'cd-track':
        for gamma, sigma in zip(report['gamma'], report['sigma']):
            print(f"   gamma {gamma:.3e}: sigma = {sigma[0]:+.4e} {sigma[1]:+.4e}i")
        print(f"   slope {report['slope'][0]:+.4f} {report['slope'][1]:+.4f}i "
              f"(predicted {report['predicted_slope'][0]:+.4f} {report['predicted_slope'][1]:+.4f}i)")
    elif kind == 'evolve':
        print(f"   tail power {report['tail']['power']:.3f} ± {report['tail']['uncertainty']:.3f}")
        print(f"   ringdown {report['ringdown'][0]:.6f} {report['ringdown'][1]:+.6f}i "
              f"(QNM {report['qnm'][0]:.6f} {report['qnm'][1]:+.6f}i)")
    elif kind == 'potential':
        print(f"   {report['problem']}: peak V = {report['v_peak']:.6f} at r = {report['r_peak']:.4f}")

    for message in result.get('violations', []):
        print(f"\n❌ {message}")
    print(f"\n📂 Output directory: {result['output_dir']}")


def execute(command: str, section: str, options: Dict) -> int:
    """Shared body of every subcommand; returns the exit code."""
    load_dotenv()

    if options.pop('emit_defaults'):
        print(emit_defaults(command))
        return EXIT_PASS

    json_path = options.pop('json_path')
    config_path = options.pop('config_path')
    try:
        config = build_config(command, config_path, section, options)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE

    print("=" * 60)
    print(f"  BLACK HOLE STABILITY TOOLKIT: {command}")
    print("=" * 60)

    pipeline = StabilityPipeline()
    result = pipeline.run(config, progress_callback=lambda msg: print(f"   {msg}"))

    if not result['success']:
        print(f"\n❌ {command} failed: {result.get('error')}")
        return EXIT_USAGE if result.get('usage_error') else EXIT_FAIL

    print_report(result)
    if json_path:
        path = Path(json_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(result['report'], indent=2, sort_keys=True) + '\n')

    if result['passed']:
        print(f"\n✅ {command} PASS")
        return EXIT_PASS
    print(f"\n❌ {command} FAIL")
    return EXIT_FAIL


@click.group()
def cli():
    """Linear stability toolkit for Schwarzschild and slowly rotating Kerr black holes."""


@cli.command()
@common_options
@click.option('--parity', type=click.Choice(['scalar', 'vector']), help='Master equation type')
@click.option('--l', 'l', type=int, help='Angular degree (>= 2)')
@click.option('--r-max', type=float, help='Outer radius in units of the mass')
@click.option('--points', type=int, help='Number of samples')
@click.option('--out', type=click.Path(dir_okay=False), help='CSV path with columns r, r_star, V')
def potential(**options):
    """Tabulate a master-equation potential."""
    return execute('potential', 'potential', options)


@cli.command()
@common_options
@click.option('--parity', type=click.Choice(['scalar', 'vector', 'control']),
              help="Master equation type ('control' is a negative well that must FAIL)")
@click.option('--l', 'l', type=int, help='Angular degree (>= 2)')
@click.option('--re-min', type=float)
@click.option('--re-max', type=float)
@click.option('--im-min', type=float)
@click.option('--im-max', type=float)
@click.option('--step', type=float, help='Grid spacing (default 0.05)')
@click.option('--exclusion', type=float, help='Excluded radius around sigma = 0 (default 0.05)')
@click.option('--threshold', type=float, help='PASS threshold for the normalized Wronskian (default 1e-3)')
@click.option('--out', type=click.Path(dir_okay=False), help='CSV of the scanned samples')
def scan(**options):
    """Scan the closed upper half plane for outgoing modes."""
    return execute('scan', 'scan', options)


@cli.command()
@common_options
@click.option('--parity', type=click.Choice(['scalar', 'vector']))
@click.option('--l', 'l', type=int)
@click.option('--sigma-re', type=float, help='Real part of the starting frequency')
@click.option('--sigma-im', type=float, help='Imaginary part of the starting frequency')
@click.option('--tolerance', type=float, help='Secant step tolerance (default 1e-10)')
@click.option('--max-iter', type=int)
def qnm(**options):
    """Find a quasinormal frequency and compare it with the continued fraction."""
    return execute('qnm', 'qnm', options)


@cli.command('cd-track')
@common_options
@click.option('--v', 'v', type=float, help='Damping velocity (> 1)')
@click.option('--gamma-min', type=float)
@click.option('--gamma-max', type=float)
@click.option('--gamma-points', type=int)
@click.option('--points', type=int, help='Radial grid points')
@click.option('--r-max', type=float)
def cd_track(**options):
    """Track the constraint-damping root as gamma turns on."""
    return execute('cd-track', 'cd_track', options)


@cli.command()
@common_options
@click.option('--parity', type=click.Choice(['scalar', 'vector']))
@click.option('--l', 'l', type=int)
@click.option('--h', type=float, help='Grid spacing in r_*')
@click.option('--cfl', type=float, help='dt / h (at most 0.9)')
@click.option('--duration', type=float)
@click.option('--order', type=click.Choice(['2', '4']), callback=lambda c, p, v: int(v) if v else None)
@click.option('--observer', 'observers', type=float, multiple=True, help='Observer r_* (repeatable)')
@click.option('--convergence/--no-convergence', default=None, help='Also measure the self-convergence order')
@click.option('--out', type=click.Path(dir_okay=False), help='CSV series at the first observer')
def evolve(**options):
    """Evolve a master equation in the time domain and fit its tail."""
    return execute('evolve', 'evolve', options)


@cli.command()
@common_options
@click.option('--spin', type=float, help='Kerr spin (verifies the explicit Kerr 1-forms when > 0)')
@click.option('--entry', 'entries', multiple=True, help='Catalog entry name (repeatable, default all)')
@click.option('--scheme', type=click.Choice(['FD2', 'FD4', 'ClosedFormDiff']))
@click.option('--points', type=int)
@click.option('--gamma', type=float)
@click.option('--v', 'v', type=float)
def verify(**options):
    """Verify zero-mode catalog entries against their operators."""
    return execute('verify', 'verify', options)


@cli.command()
@common_options
@click.option('--v', 'v_values', type=float, multiple=True, help='Damping velocity (repeatable)')
@click.option('--tolerance', type=float, help='Relative tolerance of the constants (default 1e-5)')
def pairings(**options):
    """Evaluate the zero-mode pairing constants."""
    return execute('pairings', 'pairings', options)


def run(argv=None) -> int:
    """Run the CLI without exiting; returns 0 on PASS, 1 on FAIL, 2 on usage errors."""
    try:
        code = cli.main(args=argv, prog_name='run_pipeline.py', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_PASS


if __name__ == '__main__':
    sys.exit(run())
