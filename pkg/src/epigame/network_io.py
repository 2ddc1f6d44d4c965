"""Reading and writing networks as edge lists and dense CSV matrices.

Edge lists start with a header line ``n <count>`` followed by one line per undirected
edge, ``i j weight``, with 0-based node indices and fields separated by whitespace.
Blank lines and ``#`` comments are ignored. Dense CSV files hold the full matrix, one
row per line.

Weights are written in their shortest round-trip form, so reading a file back and
writing it again gives the same bytes.
"""

import os

import numpy as np
import pandas as pd

from .errors import NetworkValidationError
from .network import Network, validate_network

_EDGE_COLUMNS = ["i", "j", "weight"]


def _read_edge_table(path) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            sep=r"\s+",
            comment="#",
            header=None,
            names=_EDGE_COLUMNS,
            dtype=str,
            skip_blank_lines=True,
        )
    except pd.errors.EmptyDataError as e:
        raise NetworkValidationError(f"{path}: empty edge list") from e
    except pd.errors.ParserError as e:
        raise NetworkValidationError(f"{path}: expected 'i j weight' ({e})") from e


def _node_count(path, header: pd.Series) -> int:
    if header["i"] != "n" or pd.isna(header["j"]) or not pd.isna(header["weight"]):
        raise NetworkValidationError(f"{path}: expected header 'n <count>'")
    try:
        n = int(header["j"])
    except ValueError as e:
        raise NetworkValidationError(f"{path}: invalid node count {header['j']!r}") from e
    if n < 2:
        raise NetworkValidationError(f"{path}: a network needs at least 2 agents")
    return n


def read_edgelist(path: str | os.PathLike) -> Network:
    """Read a network from an edge-list file.

    Errors name the offending edge by its position after the header, counting from 1.
    """
    table = _read_edge_table(path)
    if table.empty:
        raise NetworkValidationError(f"{path}: empty edge list")
    n = _node_count(path, table.iloc[0])
    edges = table.iloc[1:].reset_index(drop=True)
    incomplete = edges.isna().any(axis=1)
    if incomplete.any():
        row = int(np.flatnonzero(incomplete)[0]) + 1
        raise NetworkValidationError(f"{path}: edge {row}: expected 'i j weight'")
    try:
        ks = edges["i"].astype(int).to_numpy()
        ls = edges["j"].astype(int).to_numpy()
        ws = edges["weight"].astype(float).to_numpy()
    except ValueError as e:
        raise NetworkValidationError(f"{path}: {e}") from e
    outside = (ks < 0) | (ks >= n) | (ls < 0) | (ls >= n)
    if outside.any():
        row = int(np.flatnonzero(outside)[0]) + 1
        raise NetworkValidationError(f"{path}: edge {row}: node index out of range")
    loops = ks == ls
    if loops.any():
        row = int(np.flatnonzero(loops)[0])
        raise NetworkValidationError(f"{path}: edge {row + 1}: self-loop on node {ks[row]}")
    keys = pd.DataFrame({"k": np.minimum(ks, ls), "l": np.maximum(ks, ls)})
    repeated = keys.duplicated()
    if repeated.any():
        row = int(np.flatnonzero(repeated)[0])
        key = (int(keys["k"][row]), int(keys["l"][row]))
        raise NetworkValidationError(f"{path}: edge {row + 1}: duplicate edge {key}")
    weights = np.zeros((n, n))
    weights[ks, ls] = ws
    weights[ls, ks] = ws
    return validate_network(weights)


def write_edgelist(net: Network, path: str | os.PathLike):
    """Write `net` as an edge list; only strictly positive weights are listed."""
    links = net.links()
    edges = pd.DataFrame(
        {
            "i": [k for k, _ in links],
            "j": [l for _, l in links],  # noqa: E741
            "weight": [float(net.weights[k, l]) for k, l in links],  # noqa: E741
        },
        columns=_EDGE_COLUMNS,
    )
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"n {net.n}\n")
        edges.to_csv(f, sep=" ", header=False, index=False, lineterminator="\n")


def read_dense_csv(path: str | os.PathLike) -> Network:
    """Read a network from a dense CSV matrix."""
    try:
        table = pd.read_csv(path, header=None, float_precision="round_trip")
    except pd.errors.ParserError as e:
        raise NetworkValidationError(f"{path}: rows have different lengths ({e})") from e
    except pd.errors.EmptyDataError as e:
        raise NetworkValidationError(f"{path}: empty matrix") from e
    if table.isna().to_numpy().any():
        raise NetworkValidationError(f"{path}: rows have different lengths")
    try:
        weights = table.to_numpy(dtype=np.float64)
    except ValueError as e:
        raise NetworkValidationError(f"{path}: {e}") from e
    return validate_network(weights)


def write_dense_csv(net: Network, path: str | os.PathLike):
    """Write the full weight matrix of `net` as CSV."""
    pd.DataFrame(net.weights).to_csv(path, header=False, index=False, lineterminator="\n")
