import csv
import json
import subprocess
import sys

import pytest

from risbackhaul.cli import main

SMALL = {'system': {'M': 4}, 'solver': {'E': 3, 'max_inner': 40},
         'experiment': {'trials': 1}}


def _cfg(tmp_path, doc, name='cfg.json'):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_solve_default(tmp_path, capsys):
    cfg = _cfg(tmp_path, {'system': {'M': 16}, 'solver': {'E': 5}})
    assert main(['solve', '--config', cfg, '--seed', '1', '--out', str(tmp_path)]) == 0
    out = capsys.readouterr().out
    psi = float(out.split('psi = ')[1].split()[0])
    assert 0 <= psi <= 1
    dump = json.loads((tmp_path / 'solve.json').read_text())
    assert dump['seed'] == 1 and 0 <= dump['psi'] <= 1
    assert (tmp_path / 'solve.manifest.json').exists()


def test_malformed_json(tmp_path, capsys):
    cfg = _cfg(tmp_path, '{"system": {"N": 4,,}}')
    assert main(['solve', '--config', cfg]) == 2
    err = capsys.readouterr().err
    assert 'line 1' in err and 'column' in err


@pytest.mark.parametrize('doc', [{'system': {'sigma2': 0}}, {'traffic': {'alpha': 1.2}},
                                 {'system': {'bogus': 1}}, {'solver': {'strategy': 'x'}},
                                 {'experiment': {'eta_grid': [1.5]}}])
def test_bad_config_exit_2(tmp_path, doc):
    assert main(['solve', '--config', _cfg(tmp_path, doc)]) == 2


def test_missing_config_file(tmp_path):
    assert main(['solve', '--config', str(tmp_path / 'nope.json')]) == 2


def test_validate_default(capsys):
    assert main(['validate']) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and all(l.startswith('PASS') for l in lines)


def test_sweep_traffic_default_grid(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    assert main(['sweep-traffic', '--config', cfg, '--out', str(tmp_path / 'o')]) == 0
    with open(tmp_path / 'o' / 'traffic_sweep.csv') as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 9 * 2 * 2
    manifest = json.loads((tmp_path / 'o' / 'traffic_sweep.manifest.json').read_text())
    assert manifest['config']['system']['M'] == 4 and manifest['seeds']


def test_convergence_rows_and_rerun(tmp_path):
    cfg = _cfg(tmp_path, {'system': {'M': 8}, 'solver': {'E': 5, 'max_inner': 50}})
    for d in ('a', 'b'):
        assert main(['convergence', '--config', cfg, '--seed', '3', '--format', 'json',
                     '--out', str(tmp_path / d)]) == 0
    a = (tmp_path / 'a' / 'convergence.json').read_bytes()
    assert a == (tmp_path / 'b' / 'convergence.json').read_bytes()
    assert len(json.loads(a)['rows']) == 5
    assert ((tmp_path / 'a' / 'convergence.manifest.json').read_bytes()
            == (tmp_path / 'b' / 'convergence.manifest.json').read_bytes())


def test_snapshot_and_antennas(tmp_path):
    doc = dict(SMALL, experiment={'trials': 1, 'eta_grid': [0.5], 'n_grid': [1, 2]})
    cfg = _cfg(tmp_path, doc)
    assert main(['snapshot', '--config', cfg, '--out', str(tmp_path)]) == 0
    assert main(['sweep-antennas', '--config', cfg, '--no-ris', '--out', str(tmp_path)]) == 0
    with open(tmp_path / 'antenna_sweep.csv') as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 and {r['M'] for r in rows} == {'0'}


def test_strategy_flag(tmp_path, capsys):
    cfg = _cfg(tmp_path, {'system': {'M': 4, 'L': 4}, 'solver': {'E': 3}})
    assert main(['solve', '--config', cfg, '--strategy', 'greedy', '--no-ris']) == 0
    assert 'greedy' in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    cfg = _cfg(tmp_path, {'traffic': {'alpha': 2}})
    proc = subprocess.run([sys.executable, '-m', 'risbackhaul', 'solve', '--config', cfg],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and 'alpha' in proc.stderr
