"""Uniform social distancing.

A distancing policy with cap ``kappa`` limits every agent's interactions to
``c_ij = kappa a_ij / sum_k a_ik``, so that each agent keeps a total interaction of
``kappa``. It is admissible while ``C(A, kappa) <= A``, that is while `kappa` does not
exceed the smallest row sum of ``A``. On networks that are not regular ``C(A, kappa)``
is not symmetric; a pair then interacts at the smaller of its two allowed rates, so the
policy leaves the symmetric residual ``min(C, C^T)`` and is a feasible aggregate
investment ``A - min(C, C^T)``. Its welfare therefore never exceeds the social optimum.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import InfeasibleProfileError, NetworkValidationError
from .game import GameParams, social_welfare
from .network import FEASIBILITY_TOL, AggregateInvestment, Network
from .optimum import social_optimum

logger = logging.getLogger("epigame")

#: Tolerance of the bounded scalar refinement.
KAPPA_TOL = 1e-10


@dataclass(frozen=True)
class DistancingPolicy:
    kappa: float
    matrix: np.ndarray
    admissible: bool


@dataclass(frozen=True)
class KappaSearch:
    """Best cap found, its welfare and the gap to the social optimum."""

    kappa: float
    welfare: float
    epsilon_gap: float
    optimum_welfare: float


def distancing_matrix(net: Network, kappa: float) -> DistancingPolicy:
    """The interaction matrix ``C(A, kappa)``.

    Examples
    --------
    >>> from epigame.network import complete
    >>> distancing_matrix(complete(3), 1.0).matrix
    array([[0. , 0.5, 0.5],
           [0.5, 0. , 0.5],
           [0.5, 0.5, 0. ]])
    """
    if not kappa >= 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    rows = net.weights.sum(axis=1)
    if np.any(rows <= 0):
        raise NetworkValidationError("every agent needs at least one positive weight")
    matrix = kappa * net.weights / rows[:, None]
    admissible = kappa <= float(rows.min()) * (1.0 + FEASIBILITY_TOL)
    return DistancingPolicy(float(kappa), matrix, admissible)


def evaluate_policy(net: Network, kappa: float, gp: GameParams) -> float:
    """Welfare of the aggregate investment ``A - min(C, C^T)`` that enforces the cap."""
    if gp.n != net.n:
        raise ValueError(f"game has {gp.n} agents but the network has {net.n} nodes")
    policy = distancing_matrix(net, kappa)
    if not policy.admissible:
        raise InfeasibleProfileError(f"kappa={kappa!r} exceeds the smallest row sum")
    residual = np.minimum(policy.matrix, policy.matrix.T)
    investment = AggregateInvestment(np.maximum(net.weights - residual, 0.0))
    return social_welfare(net, investment, gp)


def optimal_kappa(net: Network, gp: GameParams, points: int = 64) -> KappaSearch:
    """Best admissible cap: a coarse grid over ``[0, min row sum]`` refined by Brent's method.

    The refinement only replaces the grid point when it improves welfare, so a maximum at
    ``kappa = 0`` is reported exactly.
    """
    if points < 2:
        raise ValueError(f"points must be at least 2, got {points}")
    distancing_matrix(net, 0.0)
    k_max = float(net.weights.sum(axis=1).min())
    grid = np.linspace(0.0, k_max, points)
    values = np.array([evaluate_policy(net, k, gp) for k in grid])
    j = int(np.argmax(values))
    kappa, welfare = float(grid[j]), float(values[j])
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, points - 1)]
    refined = scipy.optimize.minimize_scalar(
        lambda k: -evaluate_policy(net, k, gp),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": KAPPA_TOL},
    )
    if refined.success and -refined.fun > welfare:
        kappa, welfare = float(refined.x), float(-refined.fun)
    optimum = social_optimum(net, gp)
    w_opt = social_welfare(net, optimum.aggregate, gp)
    logger.debug("optimal kappa %r with welfare %r (optimum %r)", kappa, welfare, w_opt)
    return KappaSearch(kappa, welfare, w_opt - welfare, w_opt)


def policy_sweep(net: Network, gp: GameParams, points: int = 64) -> list[tuple[float, float, bool]]:
    """``(kappa, welfare, admissible)`` on an even grid over ``[0, max row sum]``.

    Welfare is NaN where the cap is not admissible.
    """
    rows = net.weights.sum(axis=1)
    table = []
    for kappa in np.linspace(0.0, float(rows.max()), points):
        admissible = distancing_matrix(net, float(kappa)).admissible
        welfare = evaluate_policy(net, float(kappa), gp) if admissible else float("nan")
        table.append((float(kappa), welfare, admissible))
    return table
