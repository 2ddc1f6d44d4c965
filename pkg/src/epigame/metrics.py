"""Welfare ratios and their analytical bounds.

The price of anarchy compares the worst equilibrium found with the social optimum, the
price of autarky compares the worst local equilibrium found with the best global one.
Both are ratios of absolute welfares, which are never positive.

Worst and best equilibria come from a multi-start search and only bound the true
extremes; every :class:`WelfareMetrics` names the equilibria it was computed from.

The bounds hold on homogeneous instances played on complete networks. Their assumptions
are checked on the actual solver outputs and :class:`~epigame.errors.HypothesisError`
is raised when they are not met. Writing ``c = beta t_bar (1 - alpha)`` and ``S = 1^T D 1``:

- global: ``(N^2 / (2c) + S_eq / 2) / (N / (2c) + S_opt / 2) <= N + 2c 1^T A 1 / N``;
- local: the same with correction terms ``K_i``;
- autarky: a lower bound built from the diagonal kernel entries ``C_ii``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .closed_forms import (
    SymmetricSolution,
    complete_weight,
    symmetric_equilibrium,
    symmetric_optimum,
)
from .equilibrium import (
    DEFAULT_STARTS,
    EquilibriumReport,
    best_equilibrium,
    search_equilibria,
    worst_equilibrium,
)
from .errors import HypothesisError
from .game import GameParams, connectivity, social_welfare
from .kkt import Classification, LinkCase
from .network import GLOBAL, LOCAL, Network
from .optimum import OptimumReport, social_optimum

logger = logging.getLogger("epigame")


@dataclass(frozen=True)
class WelfareMetrics:
    """Welfares, ratios and bound values of one instance.

    Fields that a computation does not touch stay None. `degenerate` is set when a ratio
    has a zero denominator; the ratio is then NaN.
    """

    welfare_worst_local: float | None = None
    welfare_worst_global: float | None = None
    welfare_best_global: float | None = None
    welfare_optimum: float | None = None
    poa_local: float | None = None
    poa_global: float | None = None
    pok: float | None = None
    bounds: dict[str, float] = field(default_factory=dict)
    hypotheses: dict[str, str] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)
    degenerate: bool = False
    worst_found: bool = True


class LocalBound(NamedTuple):
    bound1: float
    bound2: float
    k_values: np.ndarray
    sandwich_violation: float


class AutarkyBound(NamedTuple):
    lower1: float
    lower2: float
    identity_residual: float


def _ratio(num: float, den: float) -> tuple[float, bool]:
    if den == 0:
        return math.nan, True
    return abs(num) / abs(den), False


def _is_complete(net: Network) -> bool:
    return bool(np.all(net.weights[~np.eye(net.n, dtype=bool)] > 0))


def _common_hypotheses(net: Network, gp: GameParams) -> list[str]:
    failed = []
    if not gp.epi.is_homogeneous:
        failed.append("x0 is not homogeneous")
    if not _is_complete(net):
        failed.append("network is not complete")
    if not gp.epi.t_bar > 0:
        failed.append("t_bar must be positive")
    return failed


def _no_case(cases: dict, case: LinkCase) -> bool:
    return all(c != case for c in cases.values())


def _scale(gp: GameParams) -> float:
    return gp.epi.beta * gp.epi.t_bar * (1.0 - gp.epi.alpha)


def poa_bound_global(
    net: Network, gp: GameParams, eq: EquilibriumReport, opt: OptimumReport
) -> tuple[float, float]:
    """Upper bounds ``(bound1, bound2)`` on the price of anarchy of the global game."""
    failed = _common_hypotheses(net, gp)
    if eq.mode != GLOBAL:
        failed.append("equilibrium is not one of the global game")
    if not _no_case(eq.per_link_cases, LinkCase.FULL):
        failed.append("equilibrium has a fully suppressed link")
    if not _no_case(opt.per_link_cases, LinkCase.NONE):
        failed.append("optimum leaves a link without investment")
    if failed:
        raise HypothesisError(failed)
    n = net.n
    c = _scale(gp)
    s_eq = float(eq.profile.total().sum())
    s_opt = float(opt.aggregate.total.sum())
    bound1 = (n**2 / (2 * c) + s_eq / 2) / (n / (2 * c) + s_opt / 2)
    bound2 = n + 2 * c * float(net.weights.sum()) / n
    return bound1, bound2


def _k_values(c: np.ndarray, delta: np.ndarray, diagonal) -> np.ndarray:
    n = c.shape[0]
    off = c.sum(axis=1) - np.diag(c)
    return delta * (off - (n - 1) * diagonal)


def poa_bound_local(
    net: Network, gp: GameParams, eq: EquilibriumReport, opt: OptimumReport
) -> LocalBound:
    """Upper bounds on the price of anarchy of the local game.

    Also returns the correction terms ``K_i = delta_i sum_{k != i} (C_ik - C_ii)`` at the
    equilibrium and the largest violation of
    ``0 <= rho + alpha delta_i (C_ik - C_ii) <= 2 (rho - alpha delta_i C_ii)``.
    """
    failed = _common_hypotheses(net, gp)
    n = net.n
    if n < 3:
        failed.append("the local bound needs at least 3 agents")
    if eq.mode != LOCAL:
        failed.append("equilibrium is not one of the local game")
    if not _no_case(eq.per_link_cases, LinkCase.FULL):
        failed.append("equilibrium has a fully suppressed link")
    if not _no_case(opt.per_link_cases, LinkCase.NONE):
        failed.append("optimum leaves a link without investment")
    if failed:
        raise HypothesisError(failed)
    alpha = gp.epi.alpha
    rho = gp.rho
    c = _scale(gp)
    bt = gp.epi.beta * gp.epi.t_bar
    kernel = connectivity(net, eq.profile, gp).matrix
    k_eq = _k_values(kernel, gp.delta, np.diag(kernel))
    k_top = _k_values(connectivity(net, None, gp).matrix, gp.delta, bt)
    s_eq = float(eq.profile.total().sum())
    s_opt = float(opt.aggregate.total.sum())
    factor = (n - 2) * alpha / (n - 1)
    num = (n**2 * rho + factor * k_eq.sum()) / (2 * c) + rho * s_eq / 2
    bound1 = num / (rho * (n / (2 * c) + s_opt / 2))
    bound2 = n + factor * k_top.sum() / (n * rho) + 2 * c * float(net.weights.sum()) / n

    diag = np.diag(kernel)
    middle = rho + alpha * gp.delta[:, None] * (kernel - diag[:, None])
    upper = 2 * (rho - alpha * gp.delta * diag)[:, None]
    off = ~np.eye(n, dtype=bool)
    violation = max(
        float(np.max(np.maximum(-middle, 0.0)[off])),
        float(np.max(np.maximum(middle - upper, 0.0)[off])),
    )
    return LocalBound(bound1, bound2, k_eq, violation)


def price_of_anarchy(
    net: Network,
    gp: GameParams,
    mode: str | None = None,
    starts: int = DEFAULT_STARTS,
    seed: int | None = None,
    reports: list[EquilibriumReport] | None = None,
    optimum: OptimumReport | None = None,
) -> WelfareMetrics:
    """Ratio of the worst equilibrium welfare found to the optimum welfare.

    Precomputed equilibrium `reports` and `optimum` are used when given. When the
    hypotheses of the matching bound hold, the bound values are included.
    """
    if mode is not None:
        gp = gp.replace(mode=mode)
    if reports is None:
        reports = search_equilibria(net, gp, starts=starts, seed=seed)
    if optimum is None:
        optimum = social_optimum(net, gp)
    worst = worst_equilibrium(net, gp, reports)
    w_opt = social_welfare(net, optimum.aggregate, gp)
    poa, degenerate = _ratio(worst.welfare, w_opt)
    bounds: dict[str, float] = {}
    hypotheses: dict[str, str] = {}
    if not degenerate:
        try:
            if gp.local:
                lb = poa_bound_local(net, gp, worst.report, optimum)
                bounds.update(
                    bound1=lb.bound1, bound2=lb.bound2, sandwich_violation=lb.sandwich_violation
                )
            else:
                bounds["bound1"], bounds["bound2"] = poa_bound_global(
                    net, gp, worst.report, optimum
                )
            hypotheses["poa_bound"] = "met"
        except HypothesisError as e:
            hypotheses["poa_bound"] = str(e)
    key = "local" if gp.local else "global"
    logger.debug("price of anarchy (%s): %r", key, poa)
    return WelfareMetrics(
        welfare_worst_local=worst.welfare if gp.local else None,
        welfare_worst_global=None if gp.local else worst.welfare,
        welfare_optimum=w_opt,
        poa_local=poa if gp.local else None,
        poa_global=None if gp.local else poa,
        bounds=bounds,
        hypotheses=hypotheses,
        provenance={f"worst_{key}": worst.provenance, "optimum": "projected ascent"},
        degenerate=degenerate,
    )


def pok_bound(
    net: Network, gp: GameParams, local_eq: EquilibriumReport, global_eq: EquilibriumReport
) -> AutarkyBound:
    """Lower bounds on the price of autarky and the residual of the local-equilibrium identity.

    At a homogeneous interior local equilibrium
    ``rho + alpha delta_i (C_ik - C_ii) = 2 (rho - alpha delta_i C_ii)`` for all ``k != i``.
    """
    failed = _common_hypotheses(net, gp)
    if local_eq.mode != LOCAL or global_eq.mode != GLOBAL:
        failed.append("equilibria must come from the local and the global game")
    if local_eq.classification != Classification.HOMOGENEOUS_INTERIOR:
        failed.append(f"local equilibrium is {local_eq.classification}, not HomogeneousInterior")
    if not _no_case(global_eq.per_link_cases, LinkCase.FULL):
        failed.append("global equilibrium has a fully suppressed link")
    if failed:
        raise HypothesisError(failed)
    n = net.n
    alpha = gp.epi.alpha
    rho = gp.rho
    c = _scale(gp)
    kernel = connectivity(net, local_eq.profile, gp).matrix
    diag = np.diag(kernel)
    s_local = float(local_eq.profile.total().sum())
    s_global = float(global_eq.profile.total().sum())
    num = (n * (n - 1) * rho - (n - 2) * alpha * float(gp.delta @ diag)) / c + rho * s_local / 2
    lower1 = num / (rho * (n**2 / (2 * c) + s_global / 2))
    lower2 = (n / c) / (n**2 / (2 * c) + float(net.weights.sum()))
    lhs = rho + alpha * gp.delta[:, None] * (kernel - diag[:, None])
    rhs = 2 * (rho - alpha * gp.delta * diag)[:, None]
    off = ~np.eye(n, dtype=bool)
    return AutarkyBound(lower1, lower2, float(np.max(np.abs(lhs - rhs)[off])))


def price_of_autarky(
    net: Network,
    gp: GameParams,
    starts: int = DEFAULT_STARTS,
    seed: int | None = None,
    local_reports: list[EquilibriumReport] | None = None,
    global_reports: list[EquilibriumReport] | None = None,
) -> WelfareMetrics:
    """Ratio of the worst local equilibrium welfare to the best global one."""
    gp_local = gp.replace(mode=LOCAL)
    gp_global = gp.replace(mode=GLOBAL)
    if local_reports is None:
        local_reports = search_equilibria(net, gp_local, starts=starts, seed=seed)
    if global_reports is None:
        global_reports = search_equilibria(net, gp_global, starts=starts, seed=seed)
    worst_local = worst_equilibrium(net, gp_local, local_reports)
    best_global = best_equilibrium(net, gp_global, global_reports)
    pok, degenerate = _ratio(worst_local.welfare, best_global.welfare)
    bounds: dict[str, float] = {}
    hypotheses: dict[str, str] = {}
    try:
        bound = pok_bound(net, gp, worst_local.report, best_global.report)
        bounds.update(
            pok_lower1=bound.lower1,
            pok_lower2=bound.lower2,
            pok_identity_residual=bound.identity_residual,
        )
        hypotheses["pok_bound"] = "met"
    except HypothesisError as e:
        hypotheses["pok_bound"] = str(e)
    return WelfareMetrics(
        welfare_worst_local=worst_local.welfare,
        welfare_best_global=best_global.welfare,
        pok=pok,
        bounds=bounds,
        hypotheses=hypotheses,
        provenance={
            "worst_local": worst_local.provenance,
            "best_global": best_global.provenance,
        },
        degenerate=degenerate,
    )


def symmetric_poa(
    net: Network,
    gp: GameParams,
    eq: SymmetricSolution | None = None,
    opt: SymmetricSolution | None = None,
) -> tuple[float, float]:
    """Price of anarchy of a symmetric game on an (a)-complete network, in closed form.

    Returns the exact ratio and its upper estimate
    ``N - (N - 2) delta beta t_bar alpha exp(-h) / rho + 2c 1^T A 1 / N``. Both the
    equilibrium and the optimum must be interior.
    """
    a = complete_weight(net)
    eq = eq if eq is not None else symmetric_equilibrium(a, gp)
    opt = opt if opt is not None else symmetric_optimum(a, gp)
    failed = []
    if eq.regime != Classification.INTERIOR:
        failed.append(f"equilibrium is {eq.regime}, not Interior")
    if opt.regime != Classification.INTERIOR:
        failed.append(f"optimum is {opt.regime}, not Interior")
    if failed:
        raise HypothesisError(failed)
    n = net.n
    delta = float(gp.delta[0])
    alpha = gp.epi.alpha
    rho = gp.rho
    c = _scale(gp)
    links = n * (n - 1)
    s_eq = links * eq.link_investment
    s_opt = links * opt.link_investment
    decay = math.exp(-eq.h)
    num = n**2 * rho / (2 * c) - n * (n - 2) * delta * alpha * decay / (2 * (1 - alpha))
    num += rho * s_eq / 2
    den = n * rho / (2 * c) + rho * s_opt / 2
    bt = gp.epi.beta * gp.epi.t_bar
    upper = n - (n - 2) * delta * bt * alpha * decay / rho + 2 * c * float(net.weights.sum()) / n
    return num / den, upper
