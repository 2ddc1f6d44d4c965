"""Per-link first-order conditions shared by the equilibrium and optimum checks.

On each link with positive weight the relevant marginal utility ``m`` (the largest over
the investors for an equilibrium, the sum over agents for the optimum) is compared with
the unit cost ``rho``:

- case ``a``: ``m > rho`` and the link must be fully suppressed;
- case ``b``: ``m < rho`` and the link must carry no investment;
- case ``c``: ``m == rho`` and any investment in ``[0, a]`` is admissible.

Strict inequalities are taken with margin :data:`KKT_TOL`.
"""

from collections.abc import Iterable
from enum import StrEnum

import numpy as np

#: Tolerance on every KKT verdict.
KKT_TOL = 1e-6


class LinkCase(StrEnum):
    FULL = "a"
    NONE = "b"
    INTERIOR = "c"


class Classification(StrEnum):
    FULL_INVESTMENT = "FullInvestment"
    NO_INVESTMENT = "NoInvestment"
    INTERIOR = "Interior"
    HOMOGENEOUS_INTERIOR = "HomogeneousInterior"
    MIXED = "Mixed"


def link_case(marginal: float, rho: float, tol: float = KKT_TOL) -> LinkCase:
    """
    >>> link_case(2.0, 1.0)
    <LinkCase.FULL: 'a'>
    >>> link_case(1.0 + 1e-9, 1.0)
    <LinkCase.INTERIOR: 'c'>
    """
    if marginal > rho + tol:
        return LinkCase.FULL
    if marginal < rho - tol:
        return LinkCase.NONE
    return LinkCase.INTERIOR


def natural_residual(x, gradient, cap) -> np.ndarray:
    """``|x - clip(x + g, 0, cap)|``, zero exactly at box-constrained KKT points."""
    x = np.asarray(x, dtype=np.float64)
    return np.abs(x - np.clip(x + gradient, 0.0, cap))


def classify(cases: Iterable[LinkCase], homogeneous: bool = False) -> Classification:
    """Summarise per-link cases.

    A network without links counts as carrying no investment.

    >>> classify([LinkCase.FULL, LinkCase.FULL])
    <Classification.FULL_INVESTMENT: 'FullInvestment'>
    >>> classify([LinkCase.FULL, LinkCase.NONE])
    <Classification.MIXED: 'Mixed'>
    >>> classify([])
    <Classification.NO_INVESTMENT: 'NoInvestment'>
    """
    distinct = set(cases)
    if not distinct or distinct == {LinkCase.NONE}:
        return Classification.NO_INVESTMENT
    if distinct == {LinkCase.FULL}:
        return Classification.FULL_INVESTMENT
    if distinct == {LinkCase.INTERIOR}:
        return Classification.HOMOGENEOUS_INTERIOR if homogeneous else Classification.INTERIOR
    return Classification.MIXED


def link_key(link: tuple[int, int]) -> str:
    """Text key ``"k-l"`` used when per-link maps are serialised."""
    return f"{link[0]}-{link[1]}"
