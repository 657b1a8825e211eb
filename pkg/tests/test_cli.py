import json
import subprocess
import sys

import numpy as np
import pytest

from geoindex.cli import (ConfigError, build_report, dumps_report, emit_csv,
                          parse_omegas, run)
from geoindex.indices import IndexReport
from geoindex.system import scenario


def test_parse_omegas():
    assert parse_omegas('1,-1') == [1.0, -1.0]
    assert parse_omegas('i') == [1j]
    roots = parse_omegas('roots:4')
    assert len(roots) == 4 and 1j in roots
    with pytest.raises(ConfigError):
        parse_omegas('2.0')
    with pytest.raises(ConfigError):
        parse_omegas('')
    with pytest.raises(ConfigError):
        parse_omegas('roots:0')


def test_report_schema_and_exit_zero():
    sys_ = scenario('flat-torus(2)')
    report, code = build_report(sys_, {'indices', 'stability'}, [1.0, -1.0])
    assert code == 0
    assert set(report) == {'scenario', 'orientation', 'indices', 'stability',
                           'bott', 'checks', 'diagnostics'}
    assert set(report['checks']) == {'theoremA', 'prop55', 'lemma54'}
    assert report['orientation'] == 1
    assert len(report['indices']) == 2
    assert report['stability']['parity_consistent']
    # serialization round-trips as strict JSON
    parsed = json.loads(dumps_report(report))
    assert parsed['checks']['theoremA'] is True


def test_report_deterministic_bytes():
    sys_ = scenario('twisted-rot(0.8)')
    a = dumps_report(build_report(sys_, {'indices'}, [1.0, 1j])[0])
    sys2 = scenario('twisted-rot(0.8)')
    b = dumps_report(build_report(sys2, {'indices'}, [1.0, 1j])[0])
    assert a == b


def test_violation_exit_three(monkeypatch):
    import geoindex.cli as cli

    def broken(sys_, w):
        return IndexReport(omega=complex(w), i_geo=0, nullity=0,
                           i_spec_thmA=0, i_spec_spath=1, s0=1.0,
                           routes_agree=False)

    monkeypatch.setattr(cli, 'theorem_A_check', broken)
    _, code = build_report(scenario('flat-torus(1)'), {'indices'}, [1.0])
    assert code == 3


def test_run_bott_example(capsys):
    code = run(['bott', '--scenario', 'great-circle', '--m', '2'])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out['bott']['lhs'] == 3 and out['bott']['rhs'] == 3


def test_csv_row_counts(tmp_path):
    sys_ = scenario('flat-torus(1)')
    omegas = parse_omegas('roots:4')
    report, _ = build_report(sys_, {'indices', 'stability'}, omegas)
    emit_csv(report, str(tmp_path), sys=sys_, omegas=omegas)
    lines = (tmp_path / 'indices.csv').read_text().strip().splitlines()
    assert len(lines) == 1 + 4
    assert lines[0] == 'omega_re,omega_im,i_geo,nullity,i_spec'


def test_csv_great_circle_eigenvalue_row(tmp_path):
    sys_ = scenario('great-circle')
    report, _ = build_report(sys_, {'stability'}, [1.0])
    emit_csv(report, str(tmp_path))
    lines = (tmp_path / 'eigenvalues.csv').read_text().strip().splitlines()
    assert len(lines) == 2          # header + single clustered row at 1
    assert float(lines[1].split(',')[0]) == pytest.approx(1.0, abs=1e-6)


def _cli(*args):
    return subprocess.run([sys.executable, '-m', 'geoindex', *args],
                          capture_output=True, text=True)


def test_cli_exit_codes_subprocess():
    assert _cli('analyze', '--scenario', 'nope').returncode == 1
    assert _cli('analyze', '--scenario', 'great-circle',
                '--analyses', '').returncode == 1
    assert _cli('indices', '--scenario', 'great-circle',
                '--omegas', '3').returncode == 1
    r = _cli('indices', '--scenario', 'mobius-flat', '--omegas', '-1')
    assert r.returncode == 0
    assert json.loads(r.stdout)['orientation'] == -1


def test_cli_selftest_subprocess():
    r = _cli('selftest', '--seed', '7', '--paths', '6', '--trials', '40',
             '--pairs', '3')
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert out['lemma54']['ok'] and out['clm_properties']['ok']
