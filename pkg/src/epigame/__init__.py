# ruff: noqa: E402
"""Epigame is a Python package for SI-epidemic contagion on weighted networks and
the prophylactic investment games played on them. It provides:

* Contagion dynamics: the mean-field model, its closed-form and linearised upper
  bounds, Monte Carlo and exact Markov chain references.
* Investment games: utilities, marginal utilities, Nash equilibria of the local and
  global games and the social optimum, with first-order verification.
* Welfare metrics: price of anarchy, price of autarky and their bounds, closed forms
  for symmetric games and uniform social distancing policies.

Experiments are run through commands kept in a registry: each command
is registered under an identifier and built from a configuration dictionary.

"""

from importlib.metadata import version as _version

from epigame.registry import get_command as get_command
from epigame.registry import register_command

__version__: str = _version("epigame")

from epigame.commands import Simulate

register_command(Simulate)

from epigame.commands import Equilibrium

register_command(Equilibrium)

from epigame.commands import Optimum

register_command(Optimum)

from epigame.commands import PoA

register_command(PoA)

from epigame.commands import PoK

register_command(PoK)

from epigame.commands import Policy

register_command(Policy)
