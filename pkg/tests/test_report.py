import json

import numpy as np
import pytest

from epigame.config import parse_config
from epigame.kkt import Classification, LinkCase
from epigame.report import (
    MACHINE,
    TEXT,
    CommandResult,
    Table,
    build_document,
    dumps_report,
    emit_report,
    format_text,
    read_report,
    to_jsonable,
    write_table,
)

CONFIG = json.dumps(
    {
        'network': {'id': 'complete', 'n': 2},
        'game': {'beta': 1.0, 't_bar': 2.0, 'x0': 0.5, 'rho': 2.5},
        'options': {'seed': 5},
    }
)


@pytest.fixture
def experiment():
    return parse_config(CONFIG)


@pytest.fixture
def result():
    summary = {
        'classification': Classification.INTERIOR,
        'per_link_cases': {(0, 1): LinkCase.INTERIOR},
        'welfare': np.float64(-5.25),
        'payoffs': np.array([-2.5, -2.75]),
        'poa': float('nan'),
        'order': (0, 1),
        'converged': np.bool_(True),
    }
    table = Table(['k', 'l', 'investment', 'case'], [[0, 1, 0.1, LinkCase.INTERIOR]])
    return CommandResult('equilibrium', summary, {'aggregate.csv': table})


def test_to_jsonable():
    assert to_jsonable(np.int64(3)) == 3
    assert to_jsonable(np.array([[1.0, np.nan]])) == [[1.0, None]]
    assert to_jsonable({'a': (1, 2)}) == {'a': [1, 2]}
    assert to_jsonable(LinkCase.FULL) == 'a'
    assert to_jsonable(np.bool_(False)) is False
    with pytest.raises(TypeError, match='cannot serialize'):
        to_jsonable(object())


def test_build_document(experiment, result):
    doc = build_document(result, experiment)
    assert doc['command'] == 'equilibrium'
    assert doc['converged'] is True
    assert doc['config'] == to_jsonable(experiment.resolved)
    assert doc['results']['per_link_cases'] == {'0-1': 'c'}
    assert doc['results']['classification'] == 'Interior'
    assert doc['results']['poa'] is None
    assert doc['results']['payoffs'] == [-2.5, -2.75]


def test_dumps_report(experiment, result):
    text = dumps_report(build_document(result, experiment))
    assert text.endswith('}\n')
    assert 'NaN' not in text
    assert read_report(text) == build_document(result, experiment)
    # keys are sorted at every level
    keys = list(json.loads(text))
    assert keys == sorted(keys)


def test_floats_round_trip():
    values = [0.1, 1 / 3, 2.0**-30, 1e300, -5e-324]
    assert read_report(dumps_report({'v': values}))['v'] == values
    lines = format_text({'v': 1 / 3}).split()
    assert float(lines[1]) == 1 / 3


def test_read_report_errors():
    with pytest.raises(ValueError, match='JSON object'):
        read_report('[1, 2]')


def test_format_text():
    text = format_text({'b': {'x': [1.5, None], 'y': True}, 'a': 'local', 'c': {}})
    assert text == 'a    local\nb.x  [1.5, null]\nb.y  true\nc    {}\n'


def test_write_table(tmp_path):
    path = tmp_path / 't.csv'
    write_table(Table(['kappa', 'welfare', 'admissible'], [[0.5, float('nan'), False]]), path)
    assert path.read_text() == 'kappa,welfare,admissible\n0.5,nan,false\n'


def test_emit_report(tmp_path, experiment, result):
    written = emit_report(result, experiment, tmp_path / 'out')
    names = [p.name for p in written]
    assert names == ['equilibrium.json', 'equilibrium.txt', 'aggregate.csv']
    document = read_report((tmp_path / 'out' / 'equilibrium.json').read_text())
    assert document['config']['options']['seed'] == 5
    table = (tmp_path / 'out' / 'aggregate.csv').read_text()
    assert table == 'k,l,investment,case\n0,1,0.1,c\n'
    text = (tmp_path / 'out' / 'equilibrium.txt').read_text()
    assert 'results.per_link_cases.0-1' in text


def test_emit_report_deterministic(tmp_path, experiment, result):
    first = emit_report(result, experiment, tmp_path / 'a')
    second = emit_report(result, experiment, tmp_path / 'b')
    for p, q in zip(first, second, strict=True):
        assert p.read_bytes() == q.read_bytes()


@pytest.mark.parametrize(('formats', 'count'), [([MACHINE], 2), ([TEXT], 2), ([], 1)])
def test_emit_formats(tmp_path, experiment, result, formats, count):
    assert len(emit_report(result, experiment, tmp_path, formats)) == count
    with pytest.raises(ValueError, match='format'):
        emit_report(result, experiment, tmp_path, ['yaml'])
