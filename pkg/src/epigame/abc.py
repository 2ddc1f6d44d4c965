"""This module defines the :class:`Command` base class, a common interface for
all experiment commands.

Command classes must implement a :func:`Command.run` method, which takes a parsed
:class:`~epigame.config.ExperimentConfig` and returns a
:class:`~epigame.report.CommandResult` holding the summary document and the tables
to be written.

Command classes must set a `command_id` class-level attribute. This must be a string;
it is the name of the command on the command line and in machine reports.

The remaining public attributes of a command are its options. They are collected by
:func:`Command.get_config` and restored by :func:`Command.from_config`, so that a
command can be rebuilt from the ``options`` section of an experiment configuration.
Options a command does not know are ignored, since one configuration serves every
command.

"""

from __future__ import annotations

import inspect
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from .config import ExperimentConfig
    from .report import CommandResult


class Command(ABC):
    """Command abstract base class."""

    # override in sub-class
    command_id: str | None = None
    """Command identifier."""

    @abstractmethod
    def run(self, experiment: ExperimentConfig) -> CommandResult:  # pragma: no cover
        """Run the command on `experiment`.

        Parameters
        ----------
        experiment : ExperimentConfig
            Validated network, game parameters and options.

        Returns
        -------
        result : CommandResult
        """

    def get_config(self):
        """Return a dictionary holding the options of this command, including an 'id'
        field with the command identifier. All values are JSON-serializable."""
        config = {'id': self.command_id}
        for k in self.__dict__:
            if not k.startswith('_'):
                config[k] = getattr(self, k)
        return config

    @classmethod
    def from_config(cls, config):
        """Instantiate a command from a configuration object.

        The 'id' field must already have been removed. Keys that are not parameters of
        the constructor are dropped.
        """
        params = inspect.signature(cls).parameters
        return cls(**{k: v for k, v in config.items() if k in params})

    def __eq__(self, other):
        try:
            return self.get_config() == other.get_config()
        except AttributeError:
            return False

    def __repr__(self):
        r = f'{type(self).__name__}('
        params = [
            f'{k}={getattr(self, k)!r}' for k in sorted(self.__dict__) if not k.startswith('_')
        ]
        r += ', '.join(params) + ')'
        return r
