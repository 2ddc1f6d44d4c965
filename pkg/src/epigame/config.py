"""Experiment configuration.

An experiment is a JSON document::

    {
        "network": {"id": "complete", "n": 3, "weight": 1.0},
        "game": {"delta": 1.0, "beta": 1.0, "t_bar": 2.0, "x0": 0.5, "rho": 1.5,
                 "mode": "global"},
        "options": {"seed": 42},
        "out": "results"
    }

The network section is an ``id`` naming a builtin
generator or a file format, plus its keyword parameters. File paths and ``out`` are
relative to the directory of the configuration file. Scalar ``delta`` and ``x0`` are
broadcast to every agent.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .compat import ensure_vector
from .dynamics import DEFAULT_GRID, EpidemicParams
from .equilibrium import DEFAULT_STARTS, MAX_SWEEPS
from .errors import ConfigError
from .game import GameParams
from .network import GLOBAL, Network, complete, cycle, star, validate_network
from .network_io import read_dense_csv, read_edgelist

logger = logging.getLogger("epigame")

OPTION_DEFAULTS: dict[str, Any] = {
    "samples": 100_000,
    "seed": None,
    "grid": DEFAULT_GRID,
    "multistart": DEFAULT_STARTS,
    "kappa_grid": 64,
    "max_sweeps": MAX_SWEEPS,
}

# smallest accepted value of each integer option
_OPTION_MINIMA = {
    "samples": 0,
    "seed": 0,
    "grid": 2,
    "multistart": 1,
    "kappa_grid": 2,
    "max_sweeps": 1,
}

_SEED_LIMIT = 2**64

_TOP_LEVEL = ("network", "game", "options", "out")
_GAME_REQUIRED = ("beta", "t_bar", "x0", "rho")
_GAME_DEFAULTS = {"delta": 1.0, "mode": GLOBAL}

# id -> (required parameters, optional parameters with defaults)
_NETWORKS: dict[str, tuple[tuple[str, ...], dict[str, Any]]] = {
    "complete": (("n",), {"weight": 1.0}),
    "cycle": (("n",), {"weight": 1.0}),
    "star": (("n",), {"weight": 1.0, "centre": 0}),
    "matrix": (("weights",), {}),
    "edgelist": (("path",), {}),
    "csv": (("path",), {}),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment.

    `resolved` is the configuration with every default filled in and every vector
    broadcast; it is embedded verbatim in reports. It leaves out the output directory,
    so reports do not depend on where they are written.
    """

    network: Network
    game: GameParams
    options: dict[str, Any]
    out: Path | None
    resolved: dict[str, Any]

    @property
    def seed(self) -> int | None:
        return self.options["seed"]

    def override(self, seed: int | None = None, out: str | os.PathLike | None = None):
        """Apply command-line overrides of the seed and the output directory."""
        result = self
        if seed is not None:
            seed = _check_int("options.seed", seed, _OPTION_MINIMA["seed"])
            options = {**self.options, "seed": seed}
            resolved = {**self.resolved, "options": options}
            result = replace(result, options=options, resolved=resolved)
        if out is not None:
            result = replace(result, out=Path(out))
        return result


def _check_keys(section: dict, allowed, where: str, strict: bool):
    unknown = sorted(set(section) - set(allowed))
    if not unknown:
        return
    if strict:
        raise ConfigError(f"{where}.{unknown[0]}" if where else unknown[0], "unknown key")
    logger.warning("ignoring unknown configuration keys %s", unknown)


def _check_section(doc: dict, key: str) -> dict:
    if key not in doc:
        raise ConfigError(key, "missing required key")
    section = doc[key]
    if not isinstance(section, dict):
        raise ConfigError(key, "expected an object")
    return section


def _check_number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _check_int(key: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(key, f"must be at least {minimum}, got {value}")
    if key == "options.seed" and value >= _SEED_LIMIT:
        raise ConfigError(key, "must fit in 64 bits")
    return value


def _checked(key: str, fn):
    try:
        return fn()
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(key, str(e)) from e


def _resolve_path(base_dir: Path | None, value) -> Path:
    path = Path(value)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return path


def _parse_network(
    section: dict, base_dir: Path | None, strict: bool
) -> tuple[Network, dict[str, Any]]:
    network_id = section.get("id")
    if network_id is None:
        raise ConfigError("network.id", "missing required key")
    if network_id not in _NETWORKS:
        raise ConfigError("network.id", f"unknown network {network_id!r}")
    required, optional = _NETWORKS[network_id]
    _check_keys(section, ("id", *required, *optional), "network", strict)
    for key in required:
        if key not in section:
            raise ConfigError(f"network.{key}", "missing required key")
    params = {**optional, **{k: v for k, v in section.items() if k != "id"}}
    params = {k: v for k, v in params.items() if k in required or k in optional}

    if network_id in ("complete", "cycle", "star"):
        params["n"] = _check_int("network.n", params["n"], 2)
        params["weight"] = _check_number("network.weight", params["weight"])
        if network_id == "star":
            params["centre"] = _check_int("network.centre", params["centre"], 0)
        builder = {"complete": complete, "cycle": cycle, "star": star}[network_id]
        net = _checked("network", lambda: builder(**params))
    elif network_id == "matrix":
        net = _checked("network.weights", lambda: validate_network(params["weights"]))
    else:
        if not isinstance(params["path"], str):
            raise ConfigError("network.path", f"expected a string, got {params['path']!r}")
        path = _resolve_path(base_dir, params["path"])
        if not path.is_file():
            raise ConfigError("network.path", f"file not found: {path}")
        reader = read_edgelist if network_id == "edgelist" else read_dense_csv
        net = _checked("network.path", lambda: reader(path))
    return net, {"id": network_id, **params}


def _parse_game(section: dict, n: int, strict: bool) -> tuple[GameParams, dict[str, Any]]:
    _check_keys(section, (*_GAME_REQUIRED, *_GAME_DEFAULTS), "game", strict)
    for key in _GAME_REQUIRED:
        if key not in section:
            raise ConfigError(f"game.{key}", "missing required key")
    values = {**_GAME_DEFAULTS, **section}
    beta = _check_number("game.beta", values["beta"])
    t_bar = _check_number("game.t_bar", values["t_bar"])
    rho = _check_number("game.rho", values["rho"])
    x0 = _checked("game.x0", lambda: ensure_vector(values["x0"], n, name="x0"))
    delta = _checked("game.delta", lambda: ensure_vector(values["delta"], n, name="delta"))
    epi = _checked("game", lambda: EpidemicParams(beta=beta, t_bar=t_bar, x0=x0))
    if not rho > 0:
        raise ConfigError("game.rho", f"rho must be positive, got {rho}")
    gp = _checked(
        "game.mode", lambda: GameParams(delta=delta, epi=epi, rho=rho, mode=values["mode"])
    )
    resolved = {
        "beta": beta,
        "delta": gp.delta.tolist(),
        "mode": gp.mode,
        "rho": rho,
        "t_bar": t_bar,
        "x0": epi.x0.tolist(),
    }
    return gp, resolved


def _parse_options(section: dict, strict: bool) -> dict[str, Any]:
    _check_keys(section, OPTION_DEFAULTS, "options", strict)
    options = dict(OPTION_DEFAULTS)
    for key, value in section.items():
        if key not in OPTION_DEFAULTS:
            continue
        if key == "seed" and value is None:
            continue
        options[key] = _check_int(f"options.{key}", value, _OPTION_MINIMA[key])
    return options


def parse_config(
    text: str, base_dir: str | os.PathLike | None = None, strict: bool = False
) -> ExperimentConfig:
    """Parse and validate an experiment configuration.

    Parameters
    ----------
    text : str
        JSON document.
    base_dir : path-like, optional
        Directory that relative paths are resolved against.
    strict : bool
        Reject unknown keys instead of ignoring them.

    Returns
    -------
    experiment : ExperimentConfig

    Examples
    --------
    >>> cfg = parse_config('''{"network": {"id": "complete", "n": 4},
    ...     "game": {"beta": 1, "t_bar": 1, "x0": 0.5, "rho": 2}}''')
    >>> cfg.game.epi.x0
    array([0.5, 0.5, 0.5, 0.5])
    >>> cfg.options["samples"], cfg.options["grid"], cfg.options["multistart"]
    (100000, 257, 32)
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<document>", f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("<document>", "expected an object")
    base = Path(base_dir) if base_dir is not None else None
    _check_keys(doc, _TOP_LEVEL, "", strict)

    net, network_resolved = _parse_network(_check_section(doc, "network"), base, strict)
    gp, game_resolved = _parse_game(_check_section(doc, "game"), net.n, strict)
    options_section = doc.get("options", {})
    if not isinstance(options_section, dict):
        raise ConfigError("options", "expected an object")
    options = _parse_options(options_section, strict)

    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError("out", f"expected a string, got {out!r}")
    resolved = {"network": network_resolved, "game": game_resolved, "options": dict(options)}
    return ExperimentConfig(
        network=net,
        game=gp,
        options=options,
        out=_resolve_path(base, out) if out is not None else None,
        resolved=resolved,
    )


def load_config(path: str | os.PathLike, strict: bool = False) -> ExperimentConfig:
    """Read and parse a configuration file; relative paths follow the file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("<document>", f"cannot read {path}: {e.strerror}") from e
    return parse_config(text, base_dir=path.parent, strict=strict)
