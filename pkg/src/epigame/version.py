# The version is provided by importlib.metadata. This module exists so that
# `from epigame.version import version` works for tools expecting a version module.
from importlib.metadata import version as _version

__version__: str = _version("epigame")
version: str = __version__
