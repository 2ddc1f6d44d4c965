"""The registry module maps command identifiers to command classes.

Every command shipped with epigame is registered when the package is imported. The
command line offers exactly the registered identifiers, and :func:`get_command` rebuilds
a command from the ``options`` section of an experiment configuration."""

import logging

from epigame.abc import Command
from epigame.errors import CommandConflictError, UnknownCommandError

logger = logging.getLogger("epigame")
command_registry: dict[str, type[Command]] = {}


def available_commands() -> list[str]:
    """Sorted identifiers of the registered commands.

    >>> available_commands()
    ['equilibrium', 'optimum', 'poa', 'pok', 'policy', 'simulate']
    """
    return sorted(command_registry)


def get_command(config):
    """Obtain a command for the given configuration.

    Parameters
    ----------
    config : dict-like
        Configuration object: an 'id' plus command options. Options the command does
        not take are ignored.

    Returns
    -------
    command : Command

    Examples
    --------

    >>> import epigame
    >>> epigame.get_command(dict(id='policy', kappa_grid=16, seed=3))
    Policy(kappa_grid=16)

    """
    config = dict(config)
    command_id = config.pop('id', None)
    cls = command_registry.get(command_id)
    if cls is None:
        raise UnknownCommandError(command_id)
    return cls.from_config(config)


def register_command(cls, command_id=None, replace=False):
    """Register a command class.

    Parameters
    ----------
    cls : Command class
    command_id : str, optional
        Identifier to register under; defaults to ``cls.command_id``.
    replace : bool
        Allow a different class to take over an identifier that is already registered.

    Returns
    -------
    cls : Command class

    Notes
    -----
    Registering a class again under the same identifier changes nothing. Registering a
    different class under a taken identifier raises :class:`CommandConflictError`
    unless `replace` is set.

    """
    if not (isinstance(cls, type) and issubclass(cls, Command)):
        raise TypeError(f"{cls!r} is not a Command subclass")
    if command_id is None:
        command_id = cls.command_id
    if not command_id:
        raise ValueError(f"{cls.__name__} has no command_id")
    current = command_registry.get(command_id)
    if current is not None and current is not cls and not replace:
        raise CommandConflictError(command_id, current)
    logger.debug("Registering command '%s'", command_id)
    command_registry[command_id] = cls
    return cls
