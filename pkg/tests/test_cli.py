import json
import math

import pytest

from shiftforge.cli import EXIT_OK, EXIT_REFUSED, run, validate_spec


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def _run_json(tmp_path, *argv, name='out.json'):
    out = tmp_path / name
    assert run([*argv, '--out', str(out)]) == EXIT_OK
    return json.loads(out.read_text(encoding='utf-8'))


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return str(path)


def test_entropy_of_the_bundled_golden_mean(tmp_path):
    report = _run_json(tmp_path, 'entropy', '--sft', 'golden.json', '--window', '30')
    assert report['command'] == 'entropy'
    assert report['tier'] == 'exact-1D'
    assert report['result']['entropy'] == pytest.approx(math.log(fib(32)) / 30)
    assert report['result']['exact_entropy'] == pytest.approx(math.log((1 + math.sqrt(5)) / 2))
    assert report['config']['window'] == 30
    assert report['config']['out'].endswith('out.json')


def test_count_reports_exact_integers(tmp_path):
    report = _run_json(tmp_path, 'count', '--sft', 'golden.json', '--window', '40')
    assert report['result']['count'] == str(fib(42))


def test_usage_errors_exit_with_refusal():
    assert run(['entropy', '--sft', 'golden.json', '--window', '5', '--bogus']) == EXIT_REFUSED
    assert run(['nonsense']) == EXIT_REFUSED


def test_malformed_input_is_refused(tmp_path):
    bad = _write(tmp_path, 'bad.json', '{"dim": 1,}')
    assert run(['entropy', '--sft', bad, '--window', '5']) == EXIT_REFUSED
    assert run(['entropy', '--sft', 'missing.json', '--window', '5']) == EXIT_REFUSED


def test_tiling_verify_on_a_torus(tmp_path):
    report = _run_json(tmp_path, 'tiling', 'verify', '--box', '2', '--dim', '2', '--torus', '4')
    assert report['command'] == 'tiling verify'
    assert report['result']['r1_labellings'] == 12
    assert report['result']['equal']


def test_comb_writes_a_step_table(tmp_path):
    csv_path = tmp_path / 'steps.csv'
    report = _run_json(tmp_path, 'comb', '--sft', 'golden.json', '--window', '20', '--L', '4',
                       '--eps', '0.3', '--no-decompose', '--csv', str(csv_path))
    lines = csv_path.read_text(encoding='utf-8').splitlines()
    assert len(lines) == len(report['result']['steps']) + 1
    assert any('shape_size' in w for w in report['warnings'])


# ---------------- validate ---------------- #


def test_validate_accepts_bundled_inputs(tmp_path):
    for name in ('golden.json', 'hard_square.json', 'even.json', 'dominoes.json', 'box2.json'):
        assert validate_spec(name) == [], name
    report = _run_json(tmp_path, 'validate', 'golden.json')
    assert report['result']['valid']


def test_validate_reports_a_shape_without_the_origin(tmp_path):
    path = _write(tmp_path, 'shapes.json', '{"shapes": [[[1], [2]]]}')
    codes = [n['code'] for n in validate_spec(path)]
    assert 'shape-missing-origin' in codes
    report = _run_json(tmp_path, 'validate', path)
    assert not report['result']['valid']


def test_validate_warns_on_duplicate_allowed_patterns(tmp_path):
    path = _write(tmp_path, 'dup.json', json.dumps({
        'dim': 1, 'alphabet': ['0', '1'], 'window': [[0], [1]],
        'allowed': [[0, 0], [0, 0], [0, 1], [1, 0]]}))
    notes = validate_spec(path)
    assert [n['code'] for n in notes] == ['duplicate-allowed-pattern']
    assert notes[0]['level'] == 'warning'
    report = _run_json(tmp_path, 'validate', path)
    assert report['result']['valid']


def test_validate_points_at_the_broken_byte(tmp_path):
    path = _write(tmp_path, 'bad.json', '{"dim": 1,}')
    (note,) = validate_spec(path)
    assert note['code'] == 'malformed-json'
    assert note['offset'] == 10


# ---------------- cx ---------------- #


def test_cx_find_is_byte_deterministic(tmp_path):
    out = tmp_path / 'find.json'
    assert run(['cx', 'find', '--n', '2', '--out', str(out)]) == EXIT_OK
    first = out.read_bytes()
    assert run(['cx', 'find', '--n', '2', '--out', str(out)]) == EXIT_OK
    assert out.read_bytes() == first
    assert json.loads(first)['result']['center'] == 4


def test_cx_refute(tmp_path):
    report = _run_json(tmp_path, 'cx', 'refute', '--n', '2', '--k', '1', '--height', '64')
    assert report['result']['refuted']
    assert report['result']['period'] == [5, 3]


def test_cx_refute_refuses_small_n():
    assert run(['cx', 'refute', '--n', '2', '--k', '2', '--height', '64']) == EXIT_REFUSED
