#!/usr/bin/env python3
"""
histotest CLI

Command-line interface for testing, hard-instance generation, model
selection and sample-complexity sweeps.
"""

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .config import INSTANCES, SWEEP_PARAMS, TesterConfig
from .harness import generate_hard, hard_pair_checks, hard_pair_payload, run_experiment
from .loader import load_experiment_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


def parse_sweep(text: str) -> Dict[str, Any]:
    """'eps=0.4,0.3,0.2' -> {'param': 'eps', 'values': [0.4, 0.3, 0.2]}."""
    param, sep, values = text.partition('=')
    param = param.strip()
    if not sep or param not in SWEEP_PARAMS:
        raise ValueError(f"--sweep expects <param>=<v1,v2,...> with param in {SWEEP_PARAMS}, got {text!r}")
    try:
        parsed = [float(v) for v in values.split(',') if v.strip()]
    except ValueError:
        raise ValueError(f"--sweep values must be numbers, got {values!r}")
    if not parsed:
        raise ValueError("--sweep needs at least one value")
    return {'param': param, 'values': parsed}


def parse_constants(items: Optional[List[str]]) -> Dict[str, Any]:
    """NAME=VALUE pairs for TesterConfig, cast to the field's type."""
    types = {f.name: type(f.default) for f in fields(TesterConfig)}
    constants: Dict[str, Any] = {}
    for item in items or []:
        name, sep, value = item.partition('=')
        name = name.strip()
        if not sep or name not in types:
            raise ValueError(f"Unknown constant {name!r}; expected one of {', '.join(types)}")
        try:
            constants[name] = types[name](value)
        except ValueError:
            raise ValueError(f"Constant {name} expects a {types[name].__name__}, got {value!r}")
    return constants


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument('-c', '--config', help='Experiment configuration (YAML or JSON)')
    parser.add_argument('--n', type=int, help='Domain size')
    parser.add_argument('--k', type=int, help='Number of histogram pieces')
    parser.add_argument('--eps', type=float, help='Accuracy in (0, 1)')
    parser.add_argument('--seed', type=int, help='64-bit seed; trial t uses seed XOR t')
    parser.add_argument('--trials', type=int, help='Number of independent trials')
    parser.add_argument('--jobs', type=int, help='Worker threads for trials')
    parser.add_argument('--constant', action='append', metavar='NAME=VALUE',
                        help='Override a calibrated constant (repeatable)')
    parser.add_argument('-o', '--output', help='Write <output>.csv and <output>.json')
    parser.add_argument('--no-timing', action='store_true',
                        help='Leave wall_ms empty so CSV output is reproducible byte for byte')
    parser.add_argument('--json', action='store_true', help='Print the report as JSON')
    parser.add_argument('--no-color', action='store_true', help='Disable colored output')
    parser.add_argument('-v', '--verbose', action='store_true', help='Verbose (DEBUG) logging')


def _add_instance(parser: argparse.ArgumentParser):
    parser.add_argument('--instance', choices=INSTANCES, help='Target distribution')
    parser.add_argument('--instance-path', help='pmf file for --instance file')
    parser.add_argument('--zigzag-amplitude', type=float, help='Relative amplitude of zigzag blocks')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='histotest',
        description='Sample-based testing of k-histogram distributions',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # 20 trials on a random 5-histogram
  %(prog)s test --n 1000 --k 5 --eps 0.25 --instance random-khist --trials 20

  # Write one hard YES/NO pair
  %(prog)s gen-hard --n 2048 --k 8 --eps 0.1 --out pair.json

  # Sample counts as eps shrinks
  %(prog)s bench --n 1000 --k 4 --sweep eps=0.4,0.3,0.2 -o bench
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    test = sub.add_parser('test', help='Run the k-histogram tester')
    _add_common(test)
    _add_instance(test)

    hard = sub.add_parser('gen-hard', help='Generate a moment-matched YES/NO pair')
    _add_common(hard)
    hard.add_argument('--out', help='Write the pair as JSON to this path')

    select = sub.add_parser('select-k', help='Select the number of pieces')
    _add_common(select)
    _add_instance(select)
    select.add_argument('--delta', type=float, help='Failure probability')
    select.add_argument('--refine', action='store_true', default=None, help='Scan K/2..K after doubling')

    bench = sub.add_parser('bench', help='Sweep one parameter and report sample counts')
    _add_common(bench)
    _add_instance(bench)
    bench.add_argument('--sweep', metavar='PARAM=V1,V2,...', help=f'Sweep one of {", ".join(SWEEP_PARAMS)}')
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {
        'mode': args.command,
        'n': args.n,
        'k': args.k,
        'eps': args.eps,
        'seed': args.seed,
        'trials': args.trials,
        'jobs': args.jobs,
        'output': args.output,
        'constants': parse_constants(args.constant),
        'instance': getattr(args, 'instance', None),
        'instance_path': getattr(args, 'instance_path', None),
        'zigzag_amplitude': getattr(args, 'zigzag_amplitude', None),
        'delta': getattr(args, 'delta', None),
        'refine': getattr(args, 'refine', None),
    }
    if args.no_timing:
        overrides['timing'] = False
    if getattr(args, 'sweep', None):
        overrides['sweep'] = parse_sweep(args.sweep)
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
    )

    try:
        config = load_experiment_config(args.config, _overrides(args))
    except (ValueError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if args.verbose:
        print(f"Resolved configuration: {json.dumps(config.to_dict(), default=str)}")

    try:
        if config.mode == 'gen-hard':
            hard = generate_hard(config)
            checks = hard_pair_checks(hard)
            if args.out:
                path = Path(args.out)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(json.dumps(hard_pair_payload(hard, hard.eps), indent=2), encoding='utf-8')
                logger.info("Wrote hard pair to %s", path)
            if args.json:
                print(json.dumps(checks.to_dict(), indent=2))
            else:
                print(checks.format_text(colored=not args.no_color))
            if config.trials > 1 or config.output:
                report = run_experiment(config)
                if not args.json:
                    print(report.format_text())
            return EXIT_OK

        report = run_experiment(config)
    except (ValueError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, OSError) as e:
        print(f"Runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    if args.json:
        print(report.to_json())
    else:
        if not config.output:
            print(report.to_csv(), end='')
        print(report.format_text())
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
