"""Command-line driver: ``risbr <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (and 1 if
``validate`` finds a failing property).
"""

import argparse
from dataclasses import replace
import json
import logging
import os
import sys

import numpy as np

from .config import load_config
from .errors import ConfigError, InvalidInput, NumericalFailure
from .harness import (ExperimentSpec, export, run_antenna_sweep, run_convergence,
                      run_snapshot, run_traffic_sweep, write_manifest)
from .numerics import make_rng
from .optimizer import run_algorithm
from .scenario import build_scenario

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
_SOLVER_STREAM = 7


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON run configuration')
    common.add_argument('--seed', type=int, help='scenario seed / experiment base seed')
    common.add_argument('--no-ris', action='store_true', help='force M = 0')
    common.add_argument('--out', help='output directory')
    common.add_argument('--format', choices=('csv', 'json'))
    common.add_argument('--strategy', choices=('outer', 'per-iter', 'greedy'))
    common.add_argument('-v', '--verbose', action='store_true')

    parser = argparse.ArgumentParser(prog='risbr', description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('solve', parents=[common], help='optimise one realisation')
    sub.add_parser('convergence', parents=[common], help='per-iteration trace')
    sub.add_parser('snapshot', parents=[common], help='per-BS redistribution')
    sub.add_parser('sweep-traffic', parents=[common], help='survivability vs load')
    sub.add_parser('sweep-antennas', parents=[common], help='survivability vs N')
    sub.add_parser('validate', parents=[common], help='fast invariant suite')
    return parser


def _spec(rc, args):
    spec = ExperimentSpec.from_run_config(rc)
    if args.seed is not None:
        spec = replace(spec, base_seed=args.seed)
    if args.strategy:
        spec = replace(spec, solver=replace(spec.solver, strategy=args.strategy))
    if args.no_ris:
        spec = replace(spec, scenario=spec.scenario.with_system(M=0), ris_pair=False)
    return spec


def _write(table, rc, args, name):
    out = args.out or rc.section('output')['dir']
    fmt = args.format or rc.section('output')['format']
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f'{name}.{fmt}')
    export(table, path, fmt)
    seeds = sorted({s for row in table.rows for s in row.get('seeds', [])})
    manifest = write_manifest(os.path.join(out, f'{name}.manifest.json'), rc.to_dict(),
                              seeds or [table.metadata.get('seed')],
                              {'cli': {'command': args.command, 'seed': args.seed,
                                       'no_ris': args.no_ris, 'strategy': args.strategy},
                               'metadata': table.metadata})
    print(path)
    print(manifest)


def _solve(rc, args):
    seed = 0 if args.seed is None else args.seed
    scfg = rc.scenario_config()
    if args.no_ris:
        scfg = scfg.with_system(M=0)
    solver = rc.solver_config(args.strategy)
    scenario = build_scenario(scfg, seed)
    result = run_algorithm(scenario, solver, make_rng(seed, _SOLVER_STREAM))
    print(f'R = {result.R / 1e9:.6g} Gbps   psi = {result.psi:.4f}')
    print(f'selected BSs: {[l + 1 for l in result.selection]}   '
          f'iterations: {result.iterations}   strategy: {result.strategy.value}   '
          f'time: {result.wall_time:.2f} s')
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        dump = {'seed': seed, 'selection': list(result.selection), 'R': result.R,
                'psi': result.psi, 'rates': result.rates.tolist(), 'f': result.f.tolist(),
                'phi': {'re': result.phi.real.tolist(), 'im': result.phi.imag.tolist()},
                'W': {'re': result.W.real.tolist(), 'im': result.W.imag.tolist()},
                'objective_trace': np.asarray(result.objective_trace).tolist(),
                'iterations': result.iterations, 'strategy': result.strategy.value}
        path = os.path.join(args.out, 'solve.json')
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write(json.dumps(dump, indent=1, sort_keys=True) + '\n')
        write_manifest(os.path.join(args.out, 'solve.manifest.json'), rc.to_dict(), [seed])
        print(path)
    return EXIT_OK


def _validate(rc, args):
    from .validation import run_suite
    results = run_suite(rc, 0 if args.seed is None else args.seed)
    for name, ok, detail in results:
        print(f'{"PASS" if ok else "FAIL"}  {name}  ({detail:.3g})')
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        rc = load_config(args.config)
        if args.command == 'solve':
            return _solve(rc, args)
        if args.command == 'validate':
            return _validate(rc, args)
        spec = _spec(rc, args)
        if args.command == 'convergence':
            _write(run_convergence(spec), rc, args, 'convergence')
        elif args.command == 'snapshot':
            _write(run_snapshot(spec), rc, args, 'snapshot')
        elif args.command == 'sweep-traffic':
            _write(run_traffic_sweep(spec), rc, args, 'traffic_sweep')
        else:
            _write(run_antenna_sweep(spec), rc, args, 'antenna_sweep')
        return EXIT_OK
    except (ConfigError, InvalidInput) as exc:
        print(f'config error: {exc}', file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f'numerical failure: {exc}', file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
