"""JSON run configuration.

Every section and key is optional; missing values fall back to the reference
parameter table.  Unknown keys are rejected so that typos do not silently run
the default experiment.  The Rician factor is entered in dB.
"""

import copy
from dataclasses import dataclass
import json

from .errors import ConfigError, InvalidInput
from .optimizer import SolverConfig, Strategy
from .scenario import ScenarioConfig, SystemParams

__all__ = ['DEFAULTS', 'RunConfig', 'load_config', 'parse_config']

DEFAULTS = {
    'system': {
        'N': 4, 'M': 512, 'L': 7, 'P_max': 5.0, 'B': 1e9, 'f_c': 28e9,
        'sigma2': 1e-12, 'C_0': 1e9, 'd_0': 100.0, 'kappa_dB': 9.0,
        'big_M': 1e10,
    },
    'pathloss': {'n_los': 2.0, 'n_nlos': 3.19},
    'ris': {'offset_fraction': 0.25},
    'traffic': {'eta': 0.5, 'alpha': 0.0, 'gamma': 2.0, 'sigma_chi': 0.0},
    'solver': {
        'E': 50, 'tol_outer': 1e-4, 'max_inner': 500, 'gtol': 1e-6,
        'backtrack': 0.5, 'strategy': 'outer', 'eps_reg': None,
    },
    'experiment': {
        'eta_grid': [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
        'n_grid': [2, 4, 6],
        'patterns': ['uniform', 'hotspot'],
        'hotspot': {'alpha': 0.7, 'gamma': 2.0, 'sigma_chi': 0.05},
        'trials': 20,
        'base_seed': 0,
    },
    'output': {'dir': 'results', 'format': 'csv'},
}

_INT_KEYS = {'N', 'M', 'L', 'E', 'max_inner', 'trials', 'base_seed'}


def _merge(defaults, given, path):
    if not isinstance(given, dict):
        raise ConfigError(f'{path or "config"} must be a JSON object')
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        where = f'{path}.{key}' if path else key
        if key not in defaults:
            raise ConfigError(f'unknown config key {where!r}')
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], val, where)
        else:
            out[key] = _check_type(defaults[key], val, key, where)
    return out


def _check_type(default, val, key, where):
    if isinstance(default, list):
        if not isinstance(val, list):
            raise ConfigError(f'{where} must be a list')
        return val
    if isinstance(default, str):
        if not isinstance(val, str):
            raise ConfigError(f'{where} must be a string')
        return val
    if val is None and default is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f'{where} must be a number, got {val!r}')
    if key in _INT_KEYS:
        if float(val) != int(val):
            raise ConfigError(f'{where} must be an integer')
        return int(val)
    return float(val)


@dataclass(frozen=True)
class RunConfig:
    """A fully merged configuration document."""
    data: dict

    def section(self, name):
        return self.data[name]

    def scenario_config(self, **overrides):
        s, t = self.data['system'], self.data['traffic']
        solver = self.data['solver']
        system = SystemParams(N=s['N'], M=s['M'], L=s['L'], P_max=s['P_max'], B=s['B'],
                              f_c=s['f_c'], sigma2=s['sigma2'], C_0=s['C_0'],
                              d_0=s['d_0'], kappa=10 ** (s['kappa_dB'] / 10),
                              big_M=s['big_M'], eps_reg=solver['eps_reg'], E=solver['E'])
        cfg = ScenarioConfig(system=system, n_los=self.data['pathloss']['n_los'],
                             n_nlos=self.data['pathloss']['n_nlos'],
                             ris_offset_fraction=self.data['ris']['offset_fraction'],
                             eta=t['eta'], alpha=t['alpha'], gamma=t['gamma'],
                             sigma_chi=t['sigma_chi'])
        if overrides:
            cfg = cfg.with_system(**overrides)
        return cfg

    def solver_config(self, strategy=None):
        s = self.data['solver']
        return SolverConfig(E=s['E'], tol_outer=s['tol_outer'], max_inner=s['max_inner'],
                            gtol=s['gtol'], backtrack=s['backtrack'],
                            strategy=Strategy(strategy or s['strategy']),
                            eps_reg=s['eps_reg'])

    def to_dict(self):
        return copy.deepcopy(self.data)

    def validate(self):
        """Build every derived object once so range errors surface early."""
        try:
            self.scenario_config()
            self.solver_config()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        ex = self.data['experiment']
        if ex['trials'] < 1:
            raise ConfigError('experiment.trials must be >= 1')
        if ex['base_seed'] < 0:
            raise ConfigError('experiment.base_seed must be >= 0')
        for eta in ex['eta_grid']:
            if not isinstance(eta, (int, float)) or not 0 <= eta <= 1:
                raise ConfigError(f'eta grid value {eta!r} outside [0, 1]')
        for n in ex['n_grid']:
            if not isinstance(n, int) or n < 1:
                raise ConfigError(f'antenna grid value {n!r} must be a positive integer')
        for pat in ex['patterns']:
            if pat not in ('uniform', 'hotspot'):
                raise ConfigError(f'unknown traffic pattern {pat!r}')
        if self.data['output']['format'] not in ('csv', 'json'):
            raise ConfigError('output.format must be csv or json')
        return self


def parse_config(text='{}'):
    """Parse a JSON document, reporting syntax errors with line and column."""
    try:
        given = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f'malformed JSON at line {exc.lineno}, column {exc.colno}: '
                          f'{exc.msg}') from exc
    try:
        return RunConfig(_merge(DEFAULTS, given, '')).validate()
    except InvalidInput as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None):
    if path is None:
        return parse_config('{}')
    try:
        with open(path, encoding='utf-8') as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f'cannot read config {path}: {exc}') from exc
    return parse_config(text)
