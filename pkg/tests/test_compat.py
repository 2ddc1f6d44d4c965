import numpy as np
import pytest

from epigame.compat import (
    ensure_agent,
    ensure_float_array,
    ensure_link,
    ensure_square_matrix,
    ensure_vector,
    frozen,
)


def test_ensure_float_array():
    inputs = [
        [[0, 1], [1, 0]],
        np.arange(4, dtype=np.int32),
        (0.5, 1.5),
        np.float32(2.0),
    ]
    for obj in inputs:
        arr = ensure_float_array(obj)
        assert isinstance(arr, np.ndarray)
        assert arr.dtype == np.float64


def test_ensure_float_array_copies():
    a = np.ones(3)
    arr = ensure_float_array(a)
    assert not np.shares_memory(a, arr)
    arr[0] = 5.0
    assert a[0] == 1.0


@pytest.mark.parametrize('obj', [[1.0, np.nan], [np.inf], [[0.0, -np.inf]]])
def test_ensure_float_array_non_finite(obj):
    with pytest.raises(ValueError, match='weights has non-finite'):
        ensure_float_array(obj, name='weights')


def test_ensure_float_array_invalid_inputs():
    with pytest.raises(ValueError):
        ensure_float_array(['a', 'b'])


@pytest.mark.parametrize('obj', [[1.0, 2.0], [[1.0, 2.0]], np.zeros((2, 2, 2))])
def test_ensure_square_matrix_invalid(obj):
    with pytest.raises(ValueError, match='must be square'):
        ensure_square_matrix(obj)


def test_ensure_vector():
    np.testing.assert_array_equal(ensure_vector(2, 3), [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(ensure_vector([1, 2, 3], 3), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match='x0 must have length 2, got 3'):
        ensure_vector([1, 2, 3], 2, name='x0')
    with pytest.raises(ValueError, match=r'got \(1, 2\)'):
        ensure_vector([[1, 2]], 2)


def test_ensure_link():
    assert ensure_link((3, 1), 4) == (1, 3)
    assert ensure_link([np.int64(0), 2], 3) == (0, 2)
    with pytest.raises(ValueError, match='distinct'):
        ensure_link((1, 1), 3)
    with pytest.raises(ValueError, match='out of range'):
        ensure_link((0, 3), 3)


def test_ensure_agent():
    assert ensure_agent(np.int64(2), 3) == 2
    with pytest.raises(ValueError, match='out of range'):
        ensure_agent(-1, 3)


def test_frozen():
    arr = frozen(np.zeros(2))
    assert not arr.flags.writeable
    with pytest.raises(ValueError):
        arr[0] = 1.0
