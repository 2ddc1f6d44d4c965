import numpy as np
import pytest

from epigame.errors import NetworkValidationError
from epigame.network import complete, star
from epigame.network_io import read_dense_csv, read_edgelist, write_dense_csv, write_edgelist

from .common import random_network


def test_edgelist_round_trip(tmp_path):
    net = random_network(np.random.default_rng(3), 6)
    path = tmp_path / 'net.txt'
    write_edgelist(net, path)
    assert read_edgelist(path) == net
    # rewriting gives the same bytes
    again = tmp_path / 'again.txt'
    write_edgelist(read_edgelist(path), again)
    assert again.read_bytes() == path.read_bytes()


def test_dense_csv_round_trip(tmp_path):
    net = star(5, weight=0.3)
    path = tmp_path / 'net.csv'
    write_dense_csv(net, path)
    assert read_dense_csv(path) == net


def test_edgelist_format(tmp_path):
    path = tmp_path / 'net.txt'
    write_edgelist(complete(3, weight=0.5), path)
    assert path.read_text() == 'n 3\n0 1 0.5\n0 2 0.5\n1 2 0.5\n'


def test_edgelist_comments(tmp_path):
    path = tmp_path / 'net.txt'
    path.write_text('# triangle\nn 3\n\n0 1 1.0\n1 2 2.0  \n# done\n2 0 0.5\n')
    net = read_edgelist(path)
    assert net.weights[0, 2] == 0.5
    assert net.weights[2, 1] == 2.0


bad_edgelists = [
    ('', 'empty'),
    ('3\n0 1 1\n', 'header'),
    ('n x\n', 'node count'),
    ('n 3\n0 1\n', "'i j weight'"),
    ('n 3\n0 3 1.0\n', 'out of range'),
    ('n 3\n1 1 1.0\n', 'self-loop'),
    ('n 3\n0 1 1.0\n1 0 2.0\n', 'duplicate'),
    ('n 3\n0 1 -1.0\n', 'nonnegative'),
]


@pytest.mark.parametrize(('text', 'match'), bad_edgelists)
def test_edgelist_errors(tmp_path, text, match):
    path = tmp_path / 'bad.txt'
    path.write_text(text)
    with pytest.raises(NetworkValidationError, match=match):
        read_edgelist(path)


def test_dense_csv_errors(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('0,1\n1,0,0\n')
    with pytest.raises(NetworkValidationError, match='lengths'):
        read_dense_csv(path)
    path.write_text('0,a\na,0\n')
    with pytest.raises(NetworkValidationError):
        read_dense_csv(path)
