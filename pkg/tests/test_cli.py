from __future__ import annotations

import json

import pytest

from plinv.command import run, build_parser, EXIT_OK, EXIT_FAILS, EXIT_INPUT
from plinv.serialize import file_digest

QUERY = '0.3712,0.4137'


def _fixture(tmp_path, name: str, n: int, *extra: str):
    out = tmp_path / name
    assert run(['fixtures', '--name', name, '--n', str(n), '--out', str(out), *extra]) == EXIT_OK
    return out


def _read(path) -> dict:
    return json.loads(path.read_text(encoding='utf-8'))


@pytest.fixture
def square(tmp_path):
    return _fixture(tmp_path, 'identity-square', 8)


class TestFixtures:
    def test_files_and_manifest(self, tmp_path, square):
        assert {p.name for p in square.iterdir()} == {'mesh.json', 'deformation.json', 'expectations.json'}
        manifest = _read(tmp_path / 'identity-square.manifest.json')
        assert manifest['command'] == 'fixtures'
        assert manifest['parameters']['name'] == 'identity-square'
        digest = manifest['outputs'][str(square / 'mesh.json')]
        assert digest == file_digest(square / 'mesh.json')
        assert _read(square / 'deformation.json')['mesh_ref'] == 'mesh.json'

    def test_check_writes_results(self, tmp_path):
        out = _fixture(tmp_path, 'identity-square', 8, '--check')
        results = _read(out / 'results.json')
        assert results['passed'] == results['total']

    def test_stacked_parameters(self, tmp_path):
        out = _fixture(tmp_path, 'stacked', 32, '--holes', '1', '--target', '-1')
        assert _read(out / 'expectations.json')['parameters']['target_degree'] == -1
        assert run(['fixtures', '--name', 'wrap', '--holes', '2', '--out', str(tmp_path / 'x')]) == EXIT_INPUT

    def test_output_directory_is_required(self):
        assert run(['fixtures', '--name', 'wrap']) == EXIT_INPUT


class TestDegree:
    def test_all_algorithms(self, tmp_path, square):
        report = tmp_path / 'degree.json'
        status = run(['degree', '--map', str(square / 'deformation.json'), '--query', QUERY,
                      '--algorithm', 'all', '--out', str(report)])
        assert status == EXIT_OK
        result = _read(report)
        assert result['degrees']['boundary'] == 1
        assert result['degrees']['regular-sum'] == 1
        assert result['degrees']['integral'] == pytest.approx(1.0, abs=1e-2)
        assert result['preimage_count'] == 1
        manifest = _read(tmp_path / 'degree.json.manifest.json')
        assert str(square / 'deformation.json') in manifest['inputs']
        assert manifest['parameters']['query'] == QUERY

    def test_submesh_level(self, tmp_path, square):
        report = tmp_path / 'corner.json'
        status = run(['degree', '--map', str(square / 'deformation.json'), '--mesh', str(square / 'mesh.json'),
                      '--query', '0.0312,0.0417', '--submesh', '1', '--out', str(report)])
        assert status == EXIT_OK
        assert _read(report)['degrees']['boundary'] == 0

    def test_value_on_the_boundary_image(self, square):
        assert run(['degree', '--map', str(square / 'deformation.json'), '--query', '0.5,0']) == EXIT_INPUT

    def test_malformed_query_and_missing_file(self, tmp_path, square):
        assert run(['degree', '--map', str(square / 'deformation.json'), '--query', '0.5']) == EXIT_INPUT
        assert run(['degree', '--map', str(tmp_path / 'nope.json'), '--query', QUERY]) == EXIT_INPUT

    def test_degree_field_table(self, tmp_path, square):
        report = tmp_path / 'field.json'
        assert run(['degree-field', '--map', str(square / 'deformation.json'), '--resolution', '64',
                    '--out', str(report)]) == EXIT_OK
        assert _read(report)['sigma'] == 1
        rows = (tmp_path / 'field.json.regions.csv').read_text().splitlines()
        assert rows[0] == 'label,degree,bounded,measure,clearance,x0,x1'
        assert len(rows) == 3


class TestCheck:
    def test_identity_holds(self, tmp_path, square):
        report = tmp_path / 'check.json'
        status = run(['check', '--map', str(square / 'deformation.json'), '--conditions', 'CNC,deg1,DEG1_loc,aib',
                      '--samples', '2000', '--strict', '--out', str(report)])
        assert status == EXIT_OK
        verdicts = _read(report)['verdicts']
        assert sorted(verdicts) == ['AIB', 'CNC', 'DEG1', 'DEG1_loc']
        assert {v['verdict'] for v in verdicts.values()} == {'Holds'}

    def test_strict_mode(self, tmp_path):
        wrap = _fixture(tmp_path, 'wrap', 16)
        argv = ['check', '--map', str(wrap / 'deformation.json'), '--conditions', 'deg1']
        assert run(argv) == EXIT_OK
        assert run(argv + ['--strict']) == EXIT_FAILS

    def test_unknown_condition(self, square):
        assert run(['check', '--map', str(square / 'deformation.json'), '--conditions', 'deg2']) == EXIT_INPUT

    def test_ledger(self, tmp_path, square):
        report = tmp_path / 'ledger.json'
        assert run(['check', '--map', str(square / 'deformation.json'), '--ledger', '--samples', '2000',
                    '--out', str(report)]) == EXIT_OK
        rows = _read(report)['rows']
        assert [r['row'] for r in rows] == ['a', 'b', 'c', 'd', 'g']
        assert all(r['status'] != 'contradiction' for r in rows)


def test_topology(tmp_path, square):
    report = tmp_path / 'topology.json'
    status = run(['topology', '--map', str(square / 'deformation.json'), '--covering', '2', '--query', QUERY,
                  '--eta', '0.05', '--isolate', '4', '--resolution', '64', '--out', str(report)])
    assert status == EXIT_OK
    result = _read(report)
    assert len(result['preimage']['pieces']) == 1
    assert result['isolated'][0]['slack_within_bound'] is True
    assert len(result['covering']['offsets']) == 2


class TestMinimize:
    def test_from_an_initial_map(self, tmp_path, square):
        model = tmp_path / 'model.json'
        model.write_text(json.dumps({'family': 'W1', 'p': 8, 'r': 9}))
        report = tmp_path / 'min.json'
        status = run(['minimize', '--mesh', str(square / 'mesh.json'), '--model', str(model),
                      '--initial', str(square / 'deformation.json'), '--budget', '5', '--certify', '--strict',
                      '--out', str(report)])
        assert status == EXIT_OK
        result = _read(report)
        assert result['iterations'] <= 5
        assert result['certificate']['issued'][0] == 'a'
        assert len(result['final_deformation']['images']) == 81
        trace = (tmp_path / 'min.json.trace.csv').read_text().splitlines()
        assert trace[0] == 'iteration,energy,objective'
        assert len(trace) == result['iterations'] + 2

    def test_needs_an_initial_map_or_a_box(self, tmp_path, square):
        model = tmp_path / 'model.json'
        model.write_text(json.dumps({'family': 'W1', 'p': 2, 'r': 1}))
        assert run(['minimize', '--mesh', str(square / 'mesh.json'), '--model', str(model)]) == EXIT_INPUT
        model.write_text(json.dumps({'family': 'W5', 'p': 2, 'r': 1}))
        assert run(['minimize', '--mesh', str(square / 'mesh.json'), '--model', str(model),
                    '--initial', str(square / 'deformation.json')]) == EXIT_INPUT


@pytest.mark.slow
def test_selftest_replays_byte_identical(tmp_path):
    first, second = tmp_path / 'first.json', tmp_path / 'second.json'
    for out in (first, second):
        assert run(['selftest', '--quick', '--seed', '3', '--out', str(out)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    replayed = _read(tmp_path / 'second.json.manifest.json')
    assert replayed['parameters'] == dict(_read(tmp_path / 'first.json.manifest.json')['parameters'], out=str(second))
    assert replayed['outputs'][str(second)] == file_digest(first)


def test_usage_errors():
    assert run([]) == 2
    assert run(['--version']) == 0
    assert build_parser().parse_args(['selftest', '--quick']).quick
