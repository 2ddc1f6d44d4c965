"""
This module defines custom exceptions that are raised in the `epigame` codebase.
"""


class UnknownCommandError(ValueError):
    """
    An exception that is raised when trying to receive a command that has not been registered.

    Parameters
    ----------
    command_id : str
        Command identifier.

    Examples
    ----------
    >>> import epigame
    >>> epigame.get_command({"id": "unknown"})
    Traceback (most recent call last):
        ...
    UnknownCommandError: command not available: 'unknown'
    """

    def __init__(self, command_id: str):
        self.command_id = command_id
        super().__init__(f"command not available: '{command_id}'")


class CommandConflictError(ValueError):
    """
    An exception that is raised when a command identifier is already taken by another
    command class.

    Parameters
    ----------
    command_id : str
        Command identifier.
    registered : type
        The class currently registered under `command_id`.
    """

    def __init__(self, command_id: str, registered: type):
        self.command_id = command_id
        self.registered = registered
        super().__init__(
            f"command '{command_id}' is already registered to {registered.__name__}"
        )


class NetworkValidationError(ValueError):
    """
    An exception that is raised when a weighted adjacency matrix is not a valid network.

    Examples
    ----------
    >>> from epigame.network import validate_network
    >>> validate_network([[0, 1], [2, 0]])
    Traceback (most recent call last):
        ...
    NetworkValidationError: weights are not symmetric (max asymmetry 1.0)
    """


class InfeasibleProfileError(ValueError):
    """
    An exception that is raised when investments do not fit inside the network, or when
    a strategy profile breaks the support rules of the local game.
    """


class HypothesisError(ValueError):
    """
    An exception that is raised when an analytical bound is requested on an instance
    that does not satisfy the assumptions the bound is derived under.

    Parameters
    ----------
    failed : list of str
        Human readable descriptions of the assumptions that were not met.
    """

    def __init__(self, failed: list[str]):
        self.failed = list(failed)
        super().__init__("hypotheses not met: " + "; ".join(self.failed))


class ConfigError(ValueError):
    """
    An exception that is raised when an experiment configuration is invalid.

    Parameters
    ----------
    key : str
        Dotted path of the offending configuration key.
    message : str
        What is wrong with it.

    Examples
    ----------
    >>> from epigame.config import parse_config
    >>> parse_config('{"network": {"id": "complete", "n": 3}}')
    Traceback (most recent call last):
        ...
    ConfigError: game: missing required key
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConvergenceError(RuntimeError):
    """
    An exception that is raised when an iterative numerical routine cannot reach its
    tolerance (power iteration, ODE integration).
    """
