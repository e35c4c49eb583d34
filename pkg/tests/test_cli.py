import io
import json
import math
import os

import pytest

from cli.app import (ExitCode, FermiSplitApp, RunConfig, build_parser, load_config, main,
                     resolve_potential)
from cli.graph_spec import export_graph_spec, load_graph_spec_text, parse_graph_spec
from cli.reports import FERMI_CSV_HEADER, format_float, sweep_summary, to_json_text
from engine.errors import SchemaError, ValidationError
from engine.graph_model import BUILTIN_GRAPHS, BilayerSpec, PeriodicGraph, builtin_graph

GRAPHS = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'graphs'))


def graph_file(name: str) -> str:
    return os.path.join(GRAPHS, name)


class Runner:
    """Runs commands against one app and keeps stdout and log lines"""

    def __init__(self, settings):
        self.logs = []
        self.settings = settings

    def __call__(self, *argv):
        stdout = io.StringIO()
        app = FermiSplitApp(self.settings, log_callback=self.logs.append, stdout=stdout)
        args = build_parser().parse_args([str(a) for a in argv])
        code = app.run(RunConfig.from_args(args, app.settings))
        return code, stdout.getvalue()


@pytest.fixture
def run(quiet_settings):
    return Runner(quiet_settings)


def test_edge_at_dirichlet_eigenvalue(run):
    code, out = run('edge', '--potential', 'zero', '--re', math.pi ** 2)
    assert code == ExitCode.OK
    data = json.loads(out)
    assert data['command'] == 'edge'
    assert data['result']['dtn'] is None
    assert 'Dirichlet guard' in data['result']['dtn_error']
    assert data['result']['abs_s'] < 1e-12


def test_edge_step_residuals(run):
    code, out = run('edge', '--potential', 'step', '--re', 2.0, '--im', 1.0)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['det_residual'] < 1e-9
    assert result['wronskian_residual'] < 1e-9
    assert result['dtn'] is not None


def test_factor_on_graph_file(run):
    code, out = run('factor', '--graph', graph_file('bilayer_square_zero.json'), '--re', 2.0)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['product_residual'] < 1e-10
    assert result['components_distinct'] is True


def test_factor_sweep_skips_dirichlet_point(run):
    code, out = run('factor', '--builtin', 'square_lattice', '--connector', 'zero',
                    '--re', 2.0, '--re-end', repr(math.pi ** 2), '--sweep', 3)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert [p['status'] for p in result['points']] == ['ok', 'ok', 'skipped']
    assert result['summary']['count'] == 3
    assert result['summary']['skipped'] == 1
    assert result['summary']['verdicts'] == {'true': 2, 'false': 0}
    assert result['summary']['max_residual'] < 1e-10


def test_factor_rejects_mixed_classes(run):
    code, _ = run('factor', '--graph', graph_file('bilayer_graphene_step_zero.json'), '--re', 2.0)
    assert code == ExitCode.VALIDATION
    assert any('asymmetry classes' in line for line in run.logs)


def test_factor_inside_guard_exit_code(run):
    code, _ = run('factor', '--graph', graph_file('bilayer_square_zero.json'), '--re', math.pi ** 2)
    assert code == ExitCode.GUARD


def test_graphene_command(run):
    code, out = run('graphene', '--graph', graph_file('bilayer_graphene_step_zero.json'), '--re', 2.0)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['quad_residual'] < 1e-9
    assert len(result['zeta_eigs']) == 2


def test_square7_command(run):
    code, out = run('square7', '--graph', graph_file('double_square_step_zero.json'), '--re', 2.0)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['reducible'] is False
    assert result['square_test_reducible'] is False


def test_square7_with_identical_connectors(run):
    code, out = run('square7', '--builtin', 'double_square_7', '--connector', 'step', '--re', 2.0)
    assert code == ExitCode.OK
    assert json.loads(out)['result']['reducible'] is True


def test_decorated_command(run):
    code, out = run('decorated', '--builtin', 'square_lattice', '--connector', 'well', '--re', 3.0)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['max_residual'] < 1e-9
    code, _ = run('decorated', '--builtin', 'square_lattice', '--connector', 'step', '--re', 3.0)
    assert code == ExitCode.VALIDATION


def test_dispersion_command(run):
    code, out = run('dispersion', '--graph', graph_file('square.json'), '--re', math.pi ** 2 / 4)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['vertex_order'] == ['v']
    exponents = sorted(tuple(t['exponents']) for t in result['terms'])
    assert exponents == [(-1, 0), (0, -1), (0, 1), (1, 0)]


def test_dispersion_with_dangling_edge(run):
    code, out = run('dispersion', '--graph', graph_file('square_well_decorated.json'), '--re', 1.0)
    assert code == ExitCode.OK
    labels = [d['label'] for d in json.loads(out)['result']['guard_denominators']]
    assert any(label.startswith('dangling[0]') for label in labels)


def test_fermi_csv(run):
    code, out = run('fermi', '--builtin', 'square_lattice', '--re', math.pi ** 2 / 4, '--grid', 64)
    assert code == ExitCode.OK
    lines = out.splitlines()
    assert lines[0] == ','.join(FERMI_CSV_HEADER)
    assert len(lines) == 64 * 64 + 1
    first = lines[1].split(',')
    assert float(first[0]) == pytest.approx(-math.pi)
    assert float(first[1]) == pytest.approx(-math.pi)


def test_classes_command(run):
    code, out = run('classes', '--potential', 'step', '--potential', 'zero', '--potential', 'constant')
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['same_class'] == [[True, False, False], [False, True, True], [False, True, True]]
    assert result['symmetric'] == [False, True, True]


def test_afun_with_dirichlet_eigenvalues(run):
    code, out = run('afun', '--potential', 'zero', '--re', 1.0, '--lambda-max', 50)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['symmetric'] is True
    assert result['dirichlet_eigenvalues'] == pytest.approx([math.pi ** 2, 4 * math.pi ** 2], abs=1e-8)


def test_rami_for_symmetric_potential(run):
    code, out = run('rami', '--potential', 'zero', '--region', -20, 20, -20, 20)
    assert code == ExitCode.OK
    result = json.loads(out)['result']
    assert result['branch_points'] == []
    assert result['decorated_realizable_obstructed'] is False


def test_usage_errors(run):
    assert run('factor', '--builtin', 'square_lattice')[0] == ExitCode.USAGE
    assert run('edge', '--re', 1.0)[0] == ExitCode.USAGE
    assert run('fermi', '--builtin', 'square_lattice', '--re', 1.0, '--sweep', 4,
               '--re-end', 2.0)[0] == ExitCode.USAGE
    assert any('does not support --sweep' in line for line in run.logs)


def test_main_rejects_unknown_command(capsys):
    assert main(['shuffle']) == ExitCode.USAGE
    assert 'invalid choice' in capsys.readouterr().err


def test_main_writes_report(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / 'edge.json'
    assert main(['edge', '--potential', 'zero', '--re', '2.0', '--out', str(out)]) == ExitCode.OK
    assert json.loads(out.read_text())['result']['det_residual'] < 1e-12
    assert (tmp_path / 'logs' / 'fermisplit.log').exists()
    assert (tmp_path / 'benchmark' / 'stats.csv').exists()


def test_reports_are_deterministic(run, tmp_path):
    paths = [tmp_path / 'first.json', tmp_path / 'second.json']
    for path in paths:
        code, _ = run('factor', '--graph', graph_file('bilayer_square_zero.json'), '--re', 3.5,
                      '--out', path)
        assert code == ExitCode.OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize('name', BUILTIN_GRAPHS)
def test_builtin_specs_round_trip(name):
    model = builtin_graph(name)
    exported = export_graph_spec(model)
    parsed = load_graph_spec_text(to_json_text(exported), name)
    assert parsed == model
    assert export_graph_spec(parsed) == exported


def test_export_round_trip(run, tmp_path):
    target = tmp_path / 'model.json'
    code, _ = run('dispersion', '--builtin', 'graphene_layer', '--connector', 'step',
                  '--connector', 'zero', '--re', 2.0, '--export', target)
    assert code == ExitCode.OK
    model = parse_graph_spec(str(target))
    assert isinstance(model, BilayerSpec)
    assert export_graph_spec(model) == json.loads(target.read_text())
    code, _ = run('factor', '--graph', target, '--re', 2.0)
    assert code == ExitCode.VALIDATION


def test_run_statistics_recorded(run, quiet_settings):
    run('factor', '--graph', graph_file('bilayer_square_zero.json'), '--re', 2.0)
    run('factor', '--graph', graph_file('bilayer_square_zero.json'), '--re', math.pi ** 2)
    with open(quiet_settings['stats_file'], encoding='utf-8') as f:
        rows = f.read().splitlines()
    assert len(rows) == 3
    assert rows[1].endswith('True') and rows[2].endswith('False')


# ---- graph-spec parsing ----

def test_schema_messages_carry_line_numbers():
    text = '\n'.join([
        '{',
        '  "rank": 2,',
        '  "vertices": [{"id": "v"}],',
        '  "edges": [',
        '    {"tail": "v", "head": "x", "shift": [1, 0], "length": 1.0}',
        '  ]',
        '}',
    ])
    with pytest.raises(SchemaError) as info:
        load_graph_spec_text(text)
    assert info.value.messages == ["line 5: edges[0]: head refers to unknown vertex 'x'"]


def test_schema_collects_every_problem():
    spec = {
        'rank': 0,
        'vertices': [{'id': 'v'}, {'id': 'v'}],
        'edges': [{'tail': 'v', 'head': 'v', 'shift': [1, 0], 'potential': 'missing'}],
        'connectors': {},
    }
    with pytest.raises(SchemaError) as info:
        load_graph_spec_text(json.dumps(spec, indent=2))
    joined = '\n'.join(info.value.messages)
    assert "'rank' must be a positive integer" in joined
    assert "duplicate id 'v'" in joined
    assert "unknown potential 'missing'" in joined


def test_missing_connector_is_reported():
    spec = {
        'rank': 2,
        'vertices': [{'id': 'a'}, {'id': 'b'}],
        'edges': [{'tail': 'a', 'head': 'b', 'shift': [1, 0]}],
        'connectors': {'a': {'kind': 'zero'}},
    }
    with pytest.raises(SchemaError) as info:
        load_graph_spec_text(json.dumps(spec))
    assert any("vertex 'b' has no connector" in m for m in info.value.messages)


def test_invalid_json_and_missing_file(tmp_path):
    with pytest.raises(SchemaError) as info:
        load_graph_spec_text('{"rank": 2,,}', 'broken.json')
    assert info.value.messages[0].startswith('broken.json: line 1')
    with pytest.raises(SchemaError):
        parse_graph_spec(str(tmp_path / 'nothing.json'))


def test_inline_potential_takes_edge_length():
    spec = {
        'rank': 1,
        'vertices': [{'id': 'v'}],
        'edges': [{'tail': 'v', 'head': 'v', 'shift': [1], 'length': 2.0,
                   'potential': {'kind': 'constant', 'value': 1.5}}],
    }
    model = load_graph_spec_text(json.dumps(spec))
    assert isinstance(model, PeriodicGraph)
    assert model.edges[0].potential.length == 2.0


# ---- configuration and report helpers ----

def test_load_config_merges_and_falls_back(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'slices': 256, 'workers': 2}))
    settings = load_config(str(path))
    assert settings['slices'] == 256 and settings['tol'] == 1e-8
    messages = []
    path.write_text('[1, 2')
    assert load_config(str(path), messages.append)['slices'] == 1024
    assert messages and 'using defaults' in messages[0]
    assert load_config(str(tmp_path / 'absent.json'))['workers'] == 'auto'


def test_resolve_potential(tmp_path):
    assert resolve_potential('step').values == (5.0, 0.0)
    path = tmp_path / 'q.json'
    path.write_text(json.dumps({'kind': 'constant', 'value': 2.0}))
    assert resolve_potential(str(path)).value == 2.0
    with pytest.raises(ValidationError):
        resolve_potential('no-such-potential')


def test_json_text_format():
    text = to_json_text({'b': 1.0 + 2.0j, 'a': [0.1, float('nan'), True, None]})
    assert text.index('"a"') < text.index('"b"')
    data = json.loads(text)
    assert data['b'] == {'im': 2.0, 're': 1.0}
    assert data['a'] == [0.1, 'nan', True, None]
    assert format_float(1.0 / 3.0) == '0.33333333333333331'
    assert format_float(0.0) == '0'


def test_sweep_summary_counts():
    entries = [
        {'status': 'ok', 'report': {'r': 1e-12, 'v': True}},
        {'status': 'ok', 'report': {'r': 3e-12, 'v': False}},
        {'status': 'skipped'},
        {'status': 'error'},
    ]
    summary = sweep_summary(entries, 'r', 'v')
    assert summary == {'count': 4, 'skipped': 1, 'errors': 1, 'max_residual': 3e-12,
                       'verdicts': {'true': 1, 'false': 1}}
