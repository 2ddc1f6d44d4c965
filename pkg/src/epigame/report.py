"""Machine and text reports, and the CSV tables written next to them.

A command produces a :class:`CommandResult`. :func:`emit_report` turns it into

* ``<command>.json``, the machine report: keys sorted, non-finite floats written as
  ``null`` and floats in their shortest round-trip form;
* ``<command>.txt``, the same content as aligned ``key  value`` lines;
* one CSV file per table of the result.

Both reports embed the resolved configuration, and neither holds a timestamp, so runs
with the same configuration and seed give byte-identical files.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np
import pandas as pd

from .config import ExperimentConfig
from .kkt import link_key

logger = logging.getLogger("epigame")

MACHINE = "machine"
TEXT = "text"
FORMATS = (MACHINE, TEXT)


class Table(NamedTuple):
    header: list[str]
    rows: list[list[Any]]


@dataclass(frozen=True)
class CommandResult:
    """Outcome of a command: its summary document and its tables by file name.

    `converged` is False when a solver stopped without meeting its tolerance; the
    reports are written all the same.
    """

    command: str
    summary: dict[str, Any]
    tables: dict[str, Table] = field(default_factory=dict)
    converged: bool = True


def to_jsonable(obj):
    """Convert numpy values, enums, tuples and link-keyed dicts to plain JSON values.

    Non-finite floats become None.

    Examples
    --------
    >>> to_jsonable({(0, 1): np.float64(0.5), "r": [np.inf, 1]})
    {'0-1': 0.5, 'r': [None, 1]}
    """
    if isinstance(obj, Mapping):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, str | enum.Enum):
        return str(obj.value) if isinstance(obj, enum.Enum) else obj
    if isinstance(obj, bool | np.bool_):
        return bool(obj)
    if isinstance(obj, int | np.integer):
        return int(obj)
    if isinstance(obj, float | np.floating):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, Sequence):
        return [to_jsonable(v) for v in obj]
    if obj is None:
        return None
    raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


def _key(k) -> str:
    if isinstance(k, tuple):
        return link_key(k)
    return str(k)


def build_document(result: CommandResult, experiment: ExperimentConfig) -> dict[str, Any]:
    return to_jsonable(
        {
            "command": result.command,
            "config": experiment.resolved,
            "converged": result.converged,
            "results": result.summary,
        }
    )


def dumps_report(document: Mapping[str, Any]) -> str:
    """Serialize a report document deterministically."""
    text = json.dumps(
        to_jsonable(document),
        sort_keys=True,
        indent=2,
        separators=(",", ": "),
        allow_nan=False,
        ensure_ascii=True,
    )
    return text + "\n"


def read_report(text: str) -> dict[str, Any]:
    """Parse a machine report.

    Examples
    --------
    >>> text = dumps_report({"results": {"poa": 1.25, "pok": None}})
    >>> dumps_report(read_report(text)) == text
    True
    """
    document = json.loads(text)
    if not isinstance(document, dict):
        raise ValueError("a report must be a JSON object")
    return document


def _format_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, list):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return str(value)


def _flatten(document: Mapping[str, Any], prefix: str = "") -> list[tuple[str, str]]:
    lines = []
    for key in sorted(document):
        value = document[key]
        name = f"{prefix}{key}"
        if isinstance(value, Mapping) and value:
            lines.extend(_flatten(value, name + "."))
        else:
            lines.append((name, _format_value(value)))
    return lines


def format_text(document: Mapping[str, Any]) -> str:
    """Aligned ``key  value`` lines, nested keys joined with dots.

    Examples
    --------
    >>> print(format_text({"results": {"poa": 0.1, "degenerate": False}}), end="")
    results.degenerate  false
    results.poa         0.10000000000000001
    """
    lines = _flatten(to_jsonable(document))
    width = max((len(k) for k, _ in lines), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in lines)


def _cell(value) -> str:
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def write_table(table: Table, path: str | os.PathLike):
    cells = [[_cell(v) for v in row] for row in table.rows]
    frame = pd.DataFrame(cells, columns=table.header, dtype=object)
    frame.to_csv(path, index=False, lineterminator="\n")


def emit_report(
    result: CommandResult,
    experiment: ExperimentConfig,
    out_dir: str | os.PathLike,
    formats: Sequence[str] = FORMATS,
) -> list[Path]:
    """Write the reports of `result` and its tables into `out_dir`.

    Returns the paths written. An unwritable directory raises :class:`OSError`.
    """
    for fmt in formats:
        if fmt not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    document = build_document(result, experiment)
    written = []
    if MACHINE in formats:
        path = out / f"{result.command}.json"
        path.write_text(dumps_report(document), encoding="utf-8", newline="\n")
        written.append(path)
    if TEXT in formats:
        path = out / f"{result.command}.txt"
        path.write_text(format_text(document), encoding="utf-8", newline="\n")
        written.append(path)
    for name, table in sorted(result.tables.items()):
        path = out / name
        write_table(table, path)
        written.append(path)
    logger.info("wrote %s", ", ".join(p.name for p in written))
    return written
