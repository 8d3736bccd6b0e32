"""Seeded Monte Carlo experiments and their tabular outputs.

Each trial's seed is a hash of ``(base_seed, sweep point, trial index)``, so
any cell can be recomputed on its own.  RIS-on and RIS-off runs of a cell
share that seed; because direct channels and traffic come from their own
sub-streams, the two runs see identical direct channels and loads.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, replace
import hashlib
import io
import json
import os
import platform

import numpy as np

from . import __version__
from .numerics import make_rng
from .optimizer import SolverConfig, run_algorithm
from .scenario import ScenarioConfig, build_scenario

__all__ = ['ExperimentSpec', 'Table', 'trial_seed', 'run_trial', 'run_convergence',
           'run_snapshot', 'run_traffic_sweep', 'run_antenna_sweep', 'export',
           'load_table', 'write_manifest', 'RESULT_COLUMNS']

_SOLVER_STREAM = 7

RESULT_COLUMNS = ['eta', 'pattern', 'ris', 'N', 'M', 'mean_R', 'mean_psi', 'std_psi',
                  'trial_R', 'trial_psi', 'seeds']
CONVERGENCE_COLUMNS = ['iteration', 'objective', 'best_objective', 'phase_change',
                       'precoder_change']
SNAPSHOT_COLUMNS = ['bs', 'x', 'y', 'd', 'local', 'selected', 'rate', 'redistributed']

HOTSPOT = {'alpha': 0.7, 'gamma': 2.0, 'sigma_chi': 0.05}


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run: base scenario, solver, sweep grids and trial count."""
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    eta_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    n_grid: tuple = (2, 4, 6)
    patterns: tuple = ('uniform', 'hotspot')
    hotspot: dict = field(default_factory=lambda: dict(HOTSPOT))
    ris_pair: bool = True
    trials: int = 20
    base_seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError('trials must be >= 1')

    @classmethod
    def from_run_config(cls, rc, **overrides):
        ex = rc.section('experiment')
        spec = cls(scenario=rc.scenario_config(), solver=rc.solver_config(),
                   eta_grid=tuple(ex['eta_grid']), n_grid=tuple(ex['n_grid']),
                   patterns=tuple(ex['patterns']), hotspot=dict(ex['hotspot']),
                   trials=ex['trials'], base_seed=ex['base_seed'])
        return replace(spec, **overrides) if overrides else spec


@dataclass
class Table:
    """Rows of plain values plus run metadata."""
    name: str
    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        return [r[name] for r in self.rows]

    def to_dict(self):
        return {'name': self.name, 'columns': list(self.columns),
                'rows': [dict(r) for r in self.rows], 'metadata': self.metadata}

    @classmethod
    def from_dict(cls, d):
        return cls(name=d['name'], columns=list(d['columns']),
                   rows=[dict(r) for r in d['rows']], metadata=d.get('metadata', {}))


def trial_seed(base_seed, point, trial):
    """Deterministic 63-bit seed for one Monte Carlo cell."""
    key = f'{int(base_seed)}|{point}|{int(trial)}'.encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), 'big') >> 1


def _point_key(value):
    return format(float(value), '.6g')


def _threads(spec):
    if spec.threads is not None:
        return max(1, int(spec.threads))
    env = os.environ.get('RISBR_THREADS')
    cap = int(env) if env and env.isdigit() and int(env) > 0 else os.cpu_count() or 1
    return max(1, min(cap, os.cpu_count() or 1))


def _pmap(fn, tasks, threads):
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def run_trial(scenario_config, solver_config, seed):
    """Build one scenario from ``seed`` and optimise it."""
    scenario = build_scenario(scenario_config, seed)
    result = run_algorithm(scenario, solver_config, make_rng(seed, _SOLVER_STREAM))
    return scenario, result


def _trial_task(args):
    scenario_config, solver_config, seed = args
    scenario, result = run_trial(scenario_config, solver_config, seed)
    return {'R': result.R, 'psi': result.psi, 'selection': result.selection,
            'iterations': result.iterations, 'P': float(np.sum(np.abs(result.W) ** 2)),
            'phi_mod_err': float(np.max(np.abs(np.abs(result.phi) - 1), initial=0.0)),
            'f_over_spare': float(np.max(result.f - scenario.traffic.spare)),
            'N': scenario.N, 'P_max': scenario.params.P_max}


def _pattern_config(spec, pattern, eta, **system):
    kw = dict(eta=eta, alpha=0.0, sigma_chi=0.0)
    if pattern == 'hotspot':
        kw.update(alpha=spec.hotspot['alpha'], gamma=spec.hotspot['gamma'],
                  sigma_chi=spec.hotspot['sigma_chi'])
    elif pattern != 'uniform':
        raise ValueError(f'unknown traffic pattern {pattern!r}')
    cfg = replace(spec.scenario, **kw)
    return cfg.with_system(**system) if system else cfg


def _summarise(eta, pattern, ris, N, M, outs, seeds):
    R = [o['R'] for o in outs]
    psi = [o['psi'] for o in outs]
    return {'eta': float(eta), 'pattern': pattern, 'ris': bool(ris), 'N': int(N),
            'M': int(M), 'mean_R': float(np.mean(R)), 'mean_psi': float(np.mean(psi)),
            'std_psi': float(np.std(psi)), 'trial_R': [float(r) for r in R],
            'trial_psi': [float(p) for p in psi], 'seeds': list(seeds)}


def _metadata(spec, kind):
    return {'experiment': kind, 'trials': spec.trials, 'base_seed': spec.base_seed,
            'paired_ris_seeds': True,
            'seed_rule': 'blake2b(base_seed|sweep point|trial) >> 1'}


def _sweep(spec, cells, kind):
    """Run ``cells`` = [(eta, pattern, N), ...] for RIS on/off pairs."""
    M_on = spec.scenario.system.M
    ris_flags = (True, False) if spec.ris_pair else (M_on > 0,)
    tasks, layout = [], []
    for eta, pattern, N in cells:
        seeds = [trial_seed(spec.base_seed, _point_key(eta), t) for t in range(spec.trials)]
        for ris in ris_flags:
            M = M_on if ris else 0
            cfg = _pattern_config(spec, pattern, eta, N=N, M=M)
            start = len(tasks)
            tasks.extend((cfg, spec.solver, s) for s in seeds)
            layout.append((eta, pattern, ris, N, M, start, seeds))
    outs = _pmap(_trial_task, tasks, _threads(spec))
    table = Table(name=kind, columns=list(RESULT_COLUMNS), metadata=_metadata(spec, kind))
    for eta, pattern, ris, N, M, start, seeds in layout:
        table.rows.append(_summarise(eta, pattern, ris, N, M,
                                     outs[start:start + len(seeds)], seeds))
    table.metadata['feasibility'] = _feasibility(outs)
    return table


def _feasibility(outs):
    ok_power = all(o['P'] <= o['P_max'] * (1 + 1e-9) for o in outs)
    ok_phase = all(o['phi_mod_err'] <= 1e-9 for o in outs)
    ok_sel = all(len(o['selection']) <= o['N'] for o in outs)
    ok_cap = all(o['f_over_spare'] <= 1e-6 for o in outs)
    return {'power': ok_power, 'unit_modulus': ok_phase, 'streams': ok_sel,
            'spare_cap': ok_cap}


def run_traffic_sweep(spec):
    """Mean traffic and survivability versus load for each pattern, RIS on/off."""
    cells = [(eta, pat, spec.scenario.system.N) for eta in spec.eta_grid
             for pat in spec.patterns]
    return _sweep(spec, cells, 'traffic_sweep')


def run_antenna_sweep(spec):
    """Mean traffic and survivability versus load for each antenna count.

    Uniform traffic only.
    """
    cells = [(eta, 'uniform', N) for N in spec.n_grid for eta in spec.eta_grid]
    return _sweep(spec, cells, 'antenna_sweep')


def run_convergence(spec, seed=None):
    """Per-iteration objective and iterate changes for one realisation.

    Early stopping is disabled so the trace always has ``E`` rows.
    """
    seed = spec.base_seed if seed is None else seed
    solver = replace(spec.solver, early_stop=False)
    scenario, result = run_trial(spec.scenario, solver, seed)
    table = Table(name='convergence', columns=list(CONVERGENCE_COLUMNS),
                  metadata={'experiment': 'convergence', 'seed': seed,
                            'selection': list(result.selection), 'R': result.R,
                            'psi': result.psi})
    for i, (obj, best, dp, dw) in enumerate(zip(result.objective_trace, result.best_trace,
                                                result.phase_change_trace,
                                                result.precoder_change_trace)):
        table.rows.append({'iteration': i, 'objective': float(obj),
                           'best_objective': float(best), 'phase_change': float(dp),
                           'precoder_change': float(dw)})
    return table


def _is_nearest(d, selection):
    if not selection:
        return True
    kth = np.sort(d)[len(selection) - 1]
    return bool(np.all(d[list(selection)] <= kth + 1e-9))


def run_snapshot(spec, seed=None):
    """Per-survivor loads and redistributed traffic for one realisation.

    ``local``, ``rate`` and ``redistributed`` are fractions of ``C_0``.
    """
    seed = spec.base_seed if seed is None else seed
    scenario, result = run_trial(spec.scenario, spec.solver, seed)
    C_0 = scenario.params.C_0
    topo = scenario.topology
    table = Table(name='snapshot', columns=list(SNAPSHOT_COLUMNS),
                  metadata={'experiment': 'snapshot', 'seed': seed,
                            'selection': list(result.selection), 'R': result.R,
                            'psi': result.psi, 'eta': scenario.traffic.eta,
                            'selected_is_nearest': _is_nearest(topo.d, result.selection),
                            'ris_position': topo.ris_position.tolist()})
    sel = set(result.selection)
    for l in range(scenario.L):
        x, y = topo.survivor_positions[l]
        table.rows.append({'bs': l, 'x': float(x), 'y': float(y), 'd': float(topo.d[l]),
                           'local': float(scenario.traffic.eta_l[l]),
                           'selected': l in sel,
                           'rate': float(result.rates[l] / C_0) if l in sel else 0.0,
                           'redistributed': float(result.f[l] / C_0)})
    return table


# ---------------------------------------------------------------------------
# output

def _fmt(v):
    if isinstance(v, bool):
        return 'true' if v else 'false'
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), '.9g')
    if isinstance(v, (list, tuple)):
        return ';'.join(_fmt(x) for x in v)
    return str(v)


def export(table, path, format='csv'):
    """Write ``table`` to ``path``; output bytes depend only on the table.

    CSV uses the table's column order as header, 9 significant digits for
    floats and ``;`` to join per-trial lists.  JSON keeps full precision and
    round-trips through :func:`load_table`.
    """
    if format == 'csv':
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(row[c]) for c in table.columns])
        text = buf.getvalue()
    elif format == 'json':
        text = json.dumps(table.to_dict(), indent=1, sort_keys=True) + '\n'
    else:
        raise ValueError(f'unknown format {format!r}')
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(text)
    return path


def load_table(path):
    with open(path, encoding='utf-8') as fh:
        return Table.from_dict(json.load(fh))


def write_manifest(path, config, seeds=None, extra=None):
    """Record config, seeds and library versions next to a result file."""
    manifest = {'config': config, 'seeds': seeds,
                'versions': {'risbackhaul': __version__, 'numpy': np.__version__,
                             'python': platform.python_version()}}
    if extra:
        manifest.update(extra)
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(json.dumps(manifest, indent=1, sort_keys=True, default=str) + '\n')
    return path
