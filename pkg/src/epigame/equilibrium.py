"""Nash equilibria of the local and global investment games.

Equilibria are computed by cyclic best responses: agents take turns maximising their
own payoff against the current investments of the others, each best response being a
projected ascent on the agent's links. The outcome is always checked against the
per-link first-order conditions, see :func:`verify_equilibrium`.

In the global game every agent may invest in every link; in the local game agent ``i``
only invests in links ``{i, j}``.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .ascent import AscentResult, projected_ascent
from .closed_forms import complete_weight, symmetric_equilibrium, symmetric_equilibrium_profile
from .compat import ensure_agent, ensure_link
from .errors import HypothesisError, InfeasibleProfileError, NetworkValidationError
from .game import GameParams, kernel_from_residual, marginal_utility_matrix, social_welfare
from .kkt import KKT_TOL, Classification, LinkCase, classify, link_case
from .network import (
    AggregateInvestment,
    Network,
    StrategyProfile,
    aggregate,
    check_feasible,
    localize_profile,
    residual_weights,
)

logger = logging.getLogger("epigame")

#: A sweep has settled once no agent's investment moves more than this.
PROFILE_TOL = 1e-8
MAX_SWEEPS = 1000

#: Longest cycle of profiles recognised as an oscillation.
MAX_PERIOD = 8

#: Random agent orders tried by :func:`search_equilibria` beyond four agents.
DEFAULT_STARTS = 32


@dataclass(frozen=True)
class EquilibriumReport:
    """A strategy profile together with its first-order verdict.

    `per_link_cases` and `eligible_sets` are keyed by links ``(k, l)``, ``k < l``, with
    positive weight. `converged` is only set when the sweeps settled *and* the profile
    passed verification.
    """

    profile: StrategyProfile
    kkt_residual: float
    classification: Classification
    per_link_cases: dict[tuple[int, int], LinkCase]
    eligible_sets: dict[tuple[int, int], tuple[int, ...]]
    is_equilibrium: bool
    mode: str
    converged: bool = True
    iterations: int = 0
    order: tuple[int, ...] | None = None
    oscillation: bool = False
    source: str = "given"

    @property
    def aggregate(self) -> AggregateInvestment:
        return AggregateInvestment(self.profile.total())


@dataclass(frozen=True)
class BestResponse:
    investment: np.ndarray
    residual: float
    iterations: int
    converged: bool


class EquilibriumSelection(NamedTuple):
    report: EquilibriumReport
    welfare: float
    provenance: str


def _investors(link: tuple[int, int], n: int, local: bool) -> tuple[int, ...]:
    return link if local else tuple(range(n))


def _agent_links(net: Network, i: int, local: bool) -> list[tuple[int, int]]:
    links = net.links()
    if local:
        return [link for link in links if i in link]
    return links


def _check_verdict(net: Network, profile: StrategyProfile, gp: GameParams, tol: float):
    mu = marginal_utility_matrix(net, profile, gp)
    total = profile.total()
    rho = gp.rho
    residual = 0.0
    homogeneous = True
    cases = {}
    eligible = {}
    for link in net.links():
        k, l = link  # noqa: E741
        investors = _investors(link, net.n, gp.local)
        values = mu[list(investors), k, l]
        top = float(values.max())
        cases[link] = link_case(top, rho, tol)
        eligible[link] = tuple(i for i, v in zip(investors, values, strict=True) if v >= rho - tol)
        homogeneous &= bool(values.max() - values.min() <= tol)
        t = total[k, l]
        residual = max(residual, abs(t - np.clip(t + top - rho, 0.0, net.weights[k, l])))
        for i in range(net.n):
            d = profile.per_agent[i, k, l]
            if d <= 0:
                continue
            # investing agents must value the link at least at its cost
            gap = rho - mu[i, k, l] if i in investors else np.inf
            residual = max(residual, min(d, gap))
    return float(residual), cases, eligible, homogeneous


def verify_equilibrium(
    net: Network, profile: StrategyProfile, gp: GameParams, tol: float = KKT_TOL
) -> tuple[bool, float, dict, dict]:
    """Check the equilibrium conditions of `profile` link by link.

    Returns ``(is_equilibrium, kkt_residual, per_link_cases, eligible_sets)``. The
    residual is the largest violation of the complementarity conditions on the
    aggregate and of the requirement that only agents valuing a link at its cost invest
    in it.
    """
    check_feasible(net, profile)
    residual, cases, eligible, _ = _check_verdict(net, profile, gp, tol)
    return residual <= tol, residual, cases, eligible


def _report(net, profile, gp, tol=KKT_TOL, **extra) -> EquilibriumReport:
    residual, cases, eligible, homogeneous = _check_verdict(net, profile, gp, tol)
    is_eq = residual <= tol
    if "converged" in extra:
        extra["converged"] = extra["converged"] and is_eq
    else:
        extra["converged"] = is_eq
    return EquilibriumReport(
        profile=profile,
        kkt_residual=residual,
        classification=classify(cases.values(), homogeneous=homogeneous),
        per_link_cases=cases,
        eligible_sets=eligible,
        is_equilibrium=is_eq,
        mode=gp.mode,
        **extra,
    )


def equilibrium_report(
    net: Network, profile: StrategyProfile, gp: GameParams, source: str = "given"
) -> EquilibriumReport:
    """Verify an arbitrary feasible `profile` and wrap the verdict in a report."""
    check_feasible(net, profile)
    return _report(net, profile, gp, source=source)


def best_response(net: Network, profile: StrategyProfile, gp: GameParams, i: int) -> BestResponse:
    """Best response of agent `i` to the investments of the others in `profile`.

    ``D^i`` of `profile` only serves as the starting point. Each link variable is capped
    by what the others leave of the link weight.
    """
    i = ensure_agent(i, net.n)
    links = _agent_links(net, i, gp.local)
    own = profile.per_agent[i]
    others = profile.total() - own
    if not links:
        return BestResponse(np.zeros_like(own), 0.0, 0, True)
    ks = np.array([k for k, _ in links])
    ls = np.array([l for _, l in links])  # noqa: E741
    base = np.maximum(net.weights - others, 0.0)
    cap = base[ks, ls]
    x0 = gp.epi.x0
    delta = gp.delta[i]

    def field(x):
        residual = np.array(base)
        residual[ks, ls] -= x
        residual[ls, ks] -= x
        c = kernel_from_residual(np.maximum(residual, 0.0), gp)
        return delta * (c[i, ks] * x0[ls] + c[i, ls] * x0[ks]) - gp.rho

    result: AscentResult = projected_ascent(field, own[ks, ls], cap)
    d = np.zeros_like(own)
    d[ks, ls] = d[ls, ks] = result.x
    return BestResponse(d, result.residual, result.iterations, result.converged)


def _check_order(order, n: int) -> tuple[int, ...]:
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order must be a permutation of range({n}), got {order}")
    return order


def find_equilibrium(
    net: Network,
    gp: GameParams,
    init: StrategyProfile | None = None,
    order: Sequence[int] | None = None,
    max_sweeps: int = MAX_SWEEPS,
    source: str | None = None,
) -> EquilibriumReport:
    """Cyclic best responses in `order` from `init` until the profile is an equilibrium.

    After a sweep that leaves the aggregate in place the profile is verified, and the
    sweeps stop as soon as it passes. The aggregate alone is not enough: agents can keep
    handing investment on a link over to each other while its total stays put, and the
    verdict is then still negative. The sweeps also stop when no agent moves more than
    :data:`PROFILE_TOL` (a fixed point, verified or not), when the profile returns to a
    value it had 2 to :data:`MAX_PERIOD` sweeps before, or after `max_sweeps`.
    """
    n = net.n
    if gp.n != n:
        raise ValueError(f"game has {gp.n} agents but the network has {n} nodes")
    profile = init if init is not None else StrategyProfile.zeros(n, local=gp.local)
    if profile.local != gp.local:
        profile = StrategyProfile(profile.per_agent, local=gp.local)
    check_feasible(net, profile)
    order = _check_order(range(n) if order is None else order, n)
    history = [profile.per_agent]
    settled = oscillation = False
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):  # noqa: B007
        previous_total = profile.total()
        for i in order:
            br = best_response(net, profile, gp, i)
            profile = profile.replace(i, br.investment)
        current = profile.per_agent
        moved = float(np.max(np.abs(current - history[-1]), initial=0.0))
        history = [*history[-MAX_PERIOD:], current]
        still = moved <= PROFILE_TOL
        if still or np.max(np.abs(profile.total() - previous_total)) <= PROFILE_TOL:
            residual = _check_verdict(net, profile, gp, KKT_TOL)[0]
            if residual <= KKT_TOL:
                settled = True
                break
            if still:
                break
            logger.debug("aggregate settled on an unverified profile (residual %g)", residual)
        if any(
            np.max(np.abs(current - history[-1 - p]), initial=0.0) <= PROFILE_TOL
            for p in range(2, MAX_PERIOD + 1)
            if len(history) > p
        ):
            oscillation = True
            break
    report = _report(
        net,
        profile,
        gp,
        converged=settled,
        iterations=sweeps,
        order=order,
        oscillation=oscillation,
        source=source or f"order {list(order)}",
    )
    if report.converged:
        logger.debug("equilibrium found after %d sweeps (%s)", sweeps, report.classification)
    else:
        logger.warning(
            "best responses did not settle (sweeps=%d, oscillation=%s, residual=%g)",
            sweeps,
            oscillation,
            report.kkt_residual,
        )
    return report


def reallocate_investments(
    net: Network,
    eq: EquilibriumReport,
    gp: GameParams,
    target: Mapping[tuple[int, int], Mapping[int, float]],
) -> EquilibriumReport:
    """Redistribute the investment on some links among their eligible agents.

    `target` maps a link to the new amount carried by each agent; agents not named carry
    nothing on that link and links not named keep their allocation. Every link total must
    be preserved and only eligible agents may receive positive amounts.
    """
    n = net.n
    arr = np.array(eq.profile.per_agent)
    totals = eq.profile.total()
    for link, shares in target.items():
        k, l = ensure_link(link, n)  # noqa: E741
        amounts = np.zeros(n)
        for i, amount in shares.items():
            i = ensure_agent(i, n)
            if amount < 0:
                raise InfeasibleProfileError(f"negative share for agent {i} on link ({k}, {l})")
            if amount > 0 and i not in eq.eligible_sets.get((k, l), ()):
                raise InfeasibleProfileError(f"agent {i} is not eligible on link ({k}, {l})")
            amounts[i] = amount
        slack = 1e-12 * max(1.0, float(net.weights[k, l]))
        if abs(amounts.sum() - totals[k, l]) > slack:
            raise InfeasibleProfileError(
                f"shares on link ({k}, {l}) sum to {amounts.sum()!r}, expected {totals[k, l]!r}"
            )
        arr[:, k, l] = arr[:, l, k] = amounts
    profile = StrategyProfile(arr, local=eq.profile.local)
    residual, cases, eligible, homogeneous = _check_verdict(net, profile, gp, KKT_TOL)
    if residual > KKT_TOL:
        raise HypothesisError([f"reallocated profile fails verification (residual {residual!r})"])
    return replace(
        eq,
        profile=profile,
        kkt_residual=residual,
        classification=classify(cases.values(), homogeneous=homogeneous),
        per_link_cases=cases,
        eligible_sets=eligible,
        is_equilibrium=True,
    )


def induced_equilibrium(
    net_tilde: Network, net: Network, eq: EquilibriumReport, gp: GameParams
) -> EquilibriumReport:
    """Carry an equilibrium of the game on `net` over to the larger network `net_tilde`.

    The extra weight ``net_tilde - net`` is absorbed by additional investment, so both
    equilibria share the same residual network. The new aggregate is split equally among
    the eligible agents of each link and verified on `net_tilde`.
    """
    allowed = {
        Classification.FULL_INVESTMENT,
        Classification.INTERIOR,
        Classification.HOMOGENEOUS_INTERIOR,
    }
    if eq.classification not in allowed:
        raise HypothesisError([f"equilibrium is {eq.classification}, not full or interior"])
    if net_tilde.n != net.n:
        raise NetworkValidationError("networks have different sizes")
    residual = residual_weights(net, eq.profile)
    if np.any(net_tilde.weights < residual - 1e-12):
        raise HypothesisError(["new network is below the equilibrium residual network"])
    total = np.maximum(net_tilde.weights - residual, 0.0)
    mu = marginal_utility_matrix(net, eq.profile, gp)
    eligibility = {}
    for link in net_tilde.links():
        k, l = link  # noqa: E741
        if total[k, l] <= 0:
            continue
        agents = eq.eligible_sets.get(link) or tuple(
            i for i in _investors(link, net.n, gp.local) if mu[i, k, l] >= gp.rho - KKT_TOL
        )
        if not agents:
            raise HypothesisError([f"no eligible agent for the extra weight on link {link}"])
        eligibility[link] = agents
    profile = localize_profile(AggregateInvestment(total), eligibility, local=gp.local)
    report = _report(net_tilde, profile, gp, source=f"induced from {eq.source}")
    if not report.is_equilibrium:
        raise HypothesisError(
            [f"induced profile fails verification (residual {report.kkt_residual!r})"]
        )
    return report


def _closed_form_report(net: Network, gp: GameParams) -> EquilibriumReport | None:
    if not gp.is_symmetric:
        return None
    try:
        a = complete_weight(net)
    except NetworkValidationError:
        return None
    sol = symmetric_equilibrium(a, gp)
    profile = symmetric_equilibrium_profile(net, sol, local=gp.local)
    return _report(net, profile, gp, source="closed form")


def search_equilibria(
    net: Network,
    gp: GameParams,
    starts: int = DEFAULT_STARTS,
    seed: int | None = None,
    max_sweeps: int = MAX_SWEEPS,
) -> list[EquilibriumReport]:
    """Run :func:`find_equilibrium` from several agent orders.

    All orders are tried for up to four agents, otherwise `starts` random orders drawn
    from `seed`. Symmetric games on (a)-complete networks add the closed-form solution.
    """
    n = net.n
    if n <= 4:
        orders = list(itertools.permutations(range(n)))
    else:
        rng = np.random.default_rng(seed)
        orders = [tuple(rng.permutation(n).tolist()) for _ in range(starts)]
    reports = [find_equilibrium(net, gp, order=o, max_sweeps=max_sweeps) for o in orders]
    closed = _closed_form_report(net, gp)
    if closed is not None:
        reports.append(closed)
    return reports


def equilibrium_welfare(net: Network, report: EquilibriumReport, gp: GameParams) -> float:
    return social_welfare(net, aggregate(report.profile, net), gp)


def _select(net, gp, reports, pick) -> EquilibriumSelection:
    if not reports:
        raise ValueError("no equilibrium reports to select from")
    candidates = [r for r in reports if r.converged]
    if not candidates:
        logger.warning("no verified equilibrium among %d candidates", len(reports))
        candidates = list(reports)
    welfares = [equilibrium_welfare(net, r, gp) for r in candidates]
    idx = pick(welfares)
    return EquilibriumSelection(candidates[idx], welfares[idx], candidates[idx].source)


def worst_equilibrium(
    net: Network, gp: GameParams, reports: Sequence[EquilibriumReport]
) -> EquilibriumSelection:
    """Lowest-welfare verified equilibrium among `reports` (the worst found)."""
    return _select(net, gp, reports, lambda w: int(np.argmin(w)))


def best_equilibrium(
    net: Network, gp: GameParams, reports: Sequence[EquilibriumReport]
) -> EquilibriumSelection:
    return _select(net, gp, reports, lambda w: int(np.argmax(w)))
