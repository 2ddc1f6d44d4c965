"""Social optimum: the aggregate investment maximising equally weighted welfare.

The planner picks ``0 <= D <= A`` to maximise ``sum_i U_i - (rho / 2) 1^T D 1``. Its
per-link marginal welfare is the exact gradient of ``sum_i U_i``, taken through the
Frechet derivative of the matrix exponential. Welfare is concave, so the first-order
conditions on the box identify the maximum.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .ascent import projected_ascent
from .game import GameParams, welfare_gradient, welfare_gradient_from_residual
from .kkt import KKT_TOL, Classification, LinkCase, classify, link_case
from .network import AggregateInvestment, Network, check_feasible

logger = logging.getLogger("epigame")


@dataclass(frozen=True)
class OptimumReport:
    aggregate: AggregateInvestment
    kkt_residual: float
    classification: Classification
    per_link_cases: dict[tuple[int, int], LinkCase]
    is_optimum: bool
    converged: bool = True
    iterations: int = 0


def verify_social_optimum(
    net: Network, aggregate: AggregateInvestment, gp: GameParams, tol: float = KKT_TOL
) -> tuple[bool, float, dict[tuple[int, int], LinkCase]]:
    """Check the planner's first-order conditions link by link.

    Returns ``(is_optimum, kkt_residual, per_link_cases)``.
    """
    check_feasible(net, aggregate)
    sums = welfare_gradient(net, aggregate, gp)
    residual = 0.0
    cases = {}
    for link in net.links():
        k, l = link  # noqa: E741
        s = float(sums[k, l])
        cases[link] = link_case(s, gp.rho, tol)
        t = aggregate.total[k, l]
        residual = max(residual, abs(t - np.clip(t + s - gp.rho, 0.0, net.weights[k, l])))
    return residual <= tol, float(residual), cases


def social_optimum(
    net: Network, gp: GameParams, init: AggregateInvestment | None = None
) -> OptimumReport:
    """Maximise welfare by projected ascent on the box ``0 <= D <= A``.

    Examples
    --------
    >>> from epigame.network import complete
    >>> from epigame.dynamics import EpidemicParams
    >>> gp = GameParams(delta=1.0, epi=EpidemicParams(1.0, 1.0, [0.5] * 3), rho=100.0)
    >>> social_optimum(complete(3), gp).classification
    <Classification.NO_INVESTMENT: 'NoInvestment'>
    """
    if gp.n != net.n:
        raise ValueError(f"game has {gp.n} agents but the network has {net.n} nodes")
    links = net.links()
    ks = np.array([k for k, _ in links], dtype=int)
    ls = np.array([l for _, l in links], dtype=int)  # noqa: E741
    cap = net.weights[ks, ls]
    if init is None:
        start = np.zeros(len(links))
    else:
        check_feasible(net, init)
        start = init.total[ks, ls]

    def field(x):
        residual = np.array(net.weights)
        residual[ks, ls] -= x
        residual[ls, ks] -= x
        grad = welfare_gradient_from_residual(np.maximum(residual, 0.0), gp)
        return grad[ks, ls] - gp.rho

    result = projected_ascent(field, start, cap)
    total = np.zeros_like(net.weights)
    total[ks, ls] = total[ls, ks] = result.x
    agg = AggregateInvestment(total)
    is_opt, residual, cases = verify_social_optimum(net, agg, gp)
    if not is_opt:
        logger.warning("social optimum not verified (residual %g)", residual)
    else:
        logger.debug("social optimum found after %d iterations", result.iterations)
    return OptimumReport(
        aggregate=agg,
        kkt_residual=residual,
        classification=classify(cases.values()),
        per_link_cases=cases,
        is_optimum=is_opt,
        converged=result.converged and is_opt,
        iterations=result.iterations,
    )
