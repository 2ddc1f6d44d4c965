import numpy as np


def ensure_float_array(obj, name="array") -> np.ndarray:
    """Convenience function to coerce `obj` to a float64 numpy array with finite entries.

    Parameters
    ----------
    obj : array-like
        Nested sequences or a numpy array.
    name : str
        Name used in error messages.

    Returns
    -------
    arr : ndarray
        A new float64 array. The input is never shared.
    """
    arr = np.array(obj, dtype=np.float64, copy=True)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def ensure_square_matrix(obj, name="matrix") -> np.ndarray:
    """Coerce `obj` to a finite float64 square matrix.

    Examples
    --------
    >>> ensure_square_matrix([[0, 1], [1, 0]])
    array([[0., 1.],
           [1., 0.]])
    >>> ensure_square_matrix([1, 2])
    Traceback (most recent call last):
        ...
    ValueError: matrix must be square, got shape (2,)
    """
    arr = ensure_float_array(obj, name=name)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def ensure_vector(obj, n: int, name="vector") -> np.ndarray:
    """Coerce `obj` to a length-`n` float64 vector, broadcasting a scalar.

    Parameters
    ----------
    obj : float or array-like
        A scalar or a sequence of length `n`.
    n : int
        Expected length.
    name : str
        Name used in error messages.

    Returns
    -------
    vec : ndarray

    Examples
    --------
    >>> ensure_vector(0.5, 3)
    array([0.5, 0.5, 0.5])
    >>> ensure_vector([1, 2], 3, name='delta')
    Traceback (most recent call last):
        ...
    ValueError: delta must have length 3, got 2
    """
    arr = ensure_float_array(obj, name=name)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.ndim != 1 or arr.shape[0] != n:
        size = arr.shape[0] if arr.ndim == 1 else arr.shape
        raise ValueError(f"{name} must have length {n}, got {size}")
    return arr


def ensure_link(link, n: int) -> tuple[int, int]:
    """Normalise a link to a pair of distinct node indices ``(k, l)`` with ``k < l``."""
    k, l = (int(v) for v in link)  # noqa: E741
    if k == l:
        raise ValueError(f"a link needs two distinct nodes, got ({k}, {l})")
    for v in (k, l):
        if not 0 <= v < n:
            raise ValueError(f"node index {v} out of range for {n} nodes")
    return (k, l) if k < l else (l, k)


def ensure_agent(i, n: int) -> int:
    i = int(i)
    if not 0 <= i < n:
        raise ValueError(f"agent index {i} out of range for {n} agents")
    return i


def frozen(arr: np.ndarray) -> np.ndarray:
    """Mark `arr` read-only and return it."""
    arr.flags.writeable = False
    return arr
