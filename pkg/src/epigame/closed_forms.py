"""Analytical solutions of special instances.

On an (a)-complete network with a symmetric game (equal `delta`, homogeneous
``x0 = alpha``) a uniform investment ``d`` on every link leaves the transformed link
weight ``h = beta t_bar (1 - alpha) (a - d)``. The kernel is then ``beta t_bar exp(H)``
with ``H = h (J - I)``, whose diagonal is ``chi(h)`` and whose off-diagonal is
``chi(h) - exp(-h)``. An endpoint's marginal utility on its own link is
``delta beta t_bar alpha chi_tilde(h)`` with ``chi_tilde = 2 chi - exp(-h)``.

The single dominant agent game plays on a star centred at the only agent with a positive
disutility weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import ConvergenceError, HypothesisError, NetworkValidationError
from .game import GameParams
from .kkt import Classification
from .network import AggregateInvestment, Network, StrategyProfile

#: Relative size of the last series term kept in :func:`chi`.
SERIES_TOL = 1e-16
SERIES_MAX_TERMS = 500

#: Absolute tolerance of every bisection.
BISECT_TOL = 1e-13


@dataclass(frozen=True)
class SymmetricSolution:
    """Uniform solution of a symmetric game on an (a)-complete network.

    `h` is the transformed residual weight of every link and `link_investment` the
    aggregate investment ``d`` per link, so that ``h = scale * (a - d)``.
    """

    h: float
    chi: float
    chi_tilde: float
    regime: Classification
    n: int
    a: float
    scale: float

    @property
    def link_investment(self) -> float:
        if self.scale == 0:
            return 0.0 if self.regime == Classification.NO_INVESTMENT else self.a
        return min(max(self.a - self.h / self.scale, 0.0), self.a)


@dataclass(frozen=True)
class SingleAgentSolution:
    """Equilibrium of the single dominant agent game on a star."""

    h: float
    mu: float
    c_self: float
    c_cross: float
    dominance: bool


def chi(h: float, n: int) -> tuple[float, float]:
    """``(chi(h), chi_tilde(h))`` from the factorial recursion.

    ``u_k`` and ``v_k`` are the diagonal and off-diagonal entries of ``H^k``; the series
    is summed with the factorial folded into each term.

    Examples
    --------
    >>> chi(0.0, 3)
    (1.0, 1.0)
    >>> import math
    >>> c, ct = chi(0.3, 2)
    >>> math.isclose(c, math.cosh(0.3), rel_tol=1e-14)
    True
    >>> math.isclose(ct, math.exp(0.3), rel_tol=1e-14)
    True
    """
    if h < 0:
        raise ValueError(f"h must be nonnegative, got {h}")
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    u, v = 0.0, h
    total = 1.0
    for k in range(2, SERIES_MAX_TERMS + 1):
        u, v = h * (n - 1) * v / k, h * ((n - 2) * v + u) / k
        total += u
        if max(u, v) < SERIES_TOL * total:
            break
    return total, 2.0 * total - math.exp(-h)


def chi_closed_form(h: float, n: int) -> tuple[float, float]:
    """``(chi, chi_tilde)`` from ``exp(H) = exp(-h) (I + (exp(n h) - 1) / n J)``.

    >>> chi_closed_form(0.0, 4)
    (1.0, 1.0)
    """
    if h < 0:
        raise ValueError(f"h must be nonnegative, got {h}")
    c = math.exp(-h) * (1.0 + math.expm1(n * h) / n)
    return c, 2.0 * c - math.exp(-h)


def complete_weight(net: Network) -> float:
    """Common link weight of an (a)-complete network."""
    off = net.weights[~np.eye(net.n, dtype=bool)]
    if not np.all(off == off[0]) or not off[0] > 0:
        raise NetworkValidationError("network is not (a)-complete")
    return float(off[0])


def _symmetric_constants(gp: GameParams) -> tuple[float, float, float]:
    if not gp.is_symmetric:
        raise HypothesisError(["game is not symmetric (equal delta, homogeneous x0)"])
    delta = float(gp.delta[0])
    alpha = gp.epi.alpha
    bt = gp.epi.beta * gp.epi.t_bar
    return delta * bt * alpha, bt * (1.0 - alpha), delta


def _check_monotone(n: int, upper: float):
    grid = np.linspace(0.0, upper, 33)
    values = [chi(h, n)[1] for h in grid]
    if np.any(np.diff(values) <= 0):
        raise ConvergenceError("chi_tilde is not increasing; bisection does not apply")


def symmetric_equilibrium(a: float, gp: GameParams) -> SymmetricSolution:
    """Symmetric equilibrium of the game on the (a)-complete network.

    The regime follows from comparing ``r = rho / (delta beta t_bar alpha)`` with ``1``
    and with ``chi_tilde(beta t_bar (1 - alpha) a)``; inside the band ``h`` solves
    ``chi_tilde(h) = r``. Local and global games share this solution.

    Examples
    --------
    >>> import math
    >>> from epigame.dynamics import EpidemicParams
    >>> gp = GameParams(delta=1.0, epi=EpidemicParams(1.0, 2.0, [0.5, 0.5]),
    ...                 rho=math.exp(0.3))
    >>> sol = symmetric_equilibrium(1.0, gp)
    >>> sol.regime, round(sol.h, 10)
    (<Classification.INTERIOR: 'Interior'>, 0.3)
    """
    n = gp.n
    unit, scale, _ = _symmetric_constants(gp)
    h_max = scale * a
    if unit == 0:
        c, ct = chi(h_max, n)
        return SymmetricSolution(h_max, c, ct, Classification.NO_INVESTMENT, n, a, scale)
    ratio = gp.rho / unit
    if ratio <= 1.0:
        return SymmetricSolution(0.0, 1.0, 1.0, Classification.FULL_INVESTMENT, n, a, scale)
    c_max, ct_max = chi(h_max, n)
    if ratio >= ct_max:
        return SymmetricSolution(h_max, c_max, ct_max, Classification.NO_INVESTMENT, n, a, scale)
    _check_monotone(n, h_max)
    h = scipy.optimize.bisect(lambda x: chi(x, n)[1] - ratio, 0.0, h_max, xtol=BISECT_TOL)
    c, ct = chi(h, n)
    return SymmetricSolution(h, c, ct, Classification.INTERIOR, n, a, scale)


def symmetric_optimum(a: float, gp: GameParams) -> SymmetricSolution:
    """Social optimum of the symmetric game on the (a)-complete network.

    The planner's marginal welfare of a link at uniform ``h`` is
    ``2 delta beta t_bar alpha exp((n - 1) h)``, so an interior optimum has a closed form.
    """
    n = gp.n
    unit, scale, _ = _symmetric_constants(gp)
    h_max = scale * a
    if unit == 0 or gp.rho >= 2.0 * unit * math.exp((n - 1) * h_max):
        c, ct = chi(h_max, n)
        return SymmetricSolution(h_max, c, ct, Classification.NO_INVESTMENT, n, a, scale)
    if 2.0 * unit >= gp.rho:
        return SymmetricSolution(0.0, 1.0, 1.0, Classification.FULL_INVESTMENT, n, a, scale)
    h = math.log(gp.rho / (2.0 * unit)) / (n - 1)
    c, ct = chi(h, n)
    return SymmetricSolution(h, c, ct, Classification.INTERIOR, n, a, scale)


def interior_existence(eps: float, gp: GameParams) -> tuple[bool, bool]:
    """Existence of equilibria on networks whose links all weigh at least `eps`.

    Returns ``(full_or_interior, interior)``: an equilibrium that is full-investment or
    interior exists iff ``rho / (delta beta t_bar alpha) < chi_tilde(beta t_bar (1 - alpha)
    eps)``; it is interior when in addition the ratio exceeds one.
    """
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    unit, scale, _ = _symmetric_constants(gp)
    if unit == 0:
        return False, False
    ratio = gp.rho / unit
    full_or_interior = ratio < chi(scale * eps, gp.n)[1]
    return full_or_interior, full_or_interior and ratio > 1.0


def symmetric_equilibrium_profile(net: Network, sol: SymmetricSolution, local: bool = False):
    """Uniform profile realising `sol`: both endpoints carry half of every link."""
    n = net.n
    d = sol.link_investment
    arr = np.zeros((n, n, n))
    for k, l in net.links():  # noqa: E741
        for i in (k, l):
            arr[i, k, l] = arr[i, l, k] = 0.5 * d
    return StrategyProfile(arr, local=local)


def symmetric_optimum_aggregate(net: Network, sol: SymmetricSolution) -> AggregateInvestment:
    total = np.where(net.weights > 0, sol.link_investment, 0.0)
    np.fill_diagonal(total, 0.0)
    return AggregateInvestment(total)


def _single_agent_rhs(mu: float, n: int) -> tuple[float, float]:
    root = math.sqrt(n - 1)
    return math.cosh(root * mu), math.sinh(root * mu) / root


def single_agent_equilibrium(a: float, gp: GameParams) -> SingleAgentSolution:
    """Equilibrium of the game where only one agent has a positive disutility weight.

    The agent invests ``h`` on each of its links of weight `a`; the residual transformed
    weight ``mu = beta t_bar (1 - alpha) (a - h)`` solves
    ``rho = delta beta t_bar alpha (cosh(sqrt(n - 1) mu) + sinh(sqrt(n - 1) mu) / sqrt(n - 1))``.

    Examples
    --------
    >>> from epigame.dynamics import EpidemicParams
    >>> gp = GameParams(delta=[1.0, 0.0, 0.0], epi=EpidemicParams(1.0, 2.0, [0.5] * 3),
    ...                 rho=2.0)
    >>> sol = single_agent_equilibrium(1.0, gp)
    >>> sol.dominance
    False
    """
    positive = np.flatnonzero(gp.delta > 0)
    failed = []
    if positive.size != 1:
        failed.append("exactly one agent must have a positive disutility weight")
    if not gp.epi.is_homogeneous:
        failed.append("x0 is not homogeneous")
    if failed:
        raise HypothesisError(failed)
    n = gp.n
    delta = float(gp.delta[positive[0]])
    alpha = gp.epi.alpha
    bt = gp.epi.beta * gp.epi.t_bar
    unit = delta * bt * alpha
    scale = bt * (1.0 - alpha)
    mu_max = scale * a
    c_self, c_cross = _single_agent_rhs(mu_max, n)
    lower, upper = unit, unit * (c_self + c_cross)
    if not lower < gp.rho < upper:
        raise HypothesisError([f"rho must lie strictly inside ({lower!r}, {upper!r})"])

    def residual(mu):
        c_self, c_cross = _single_agent_rhs(mu, n)
        return unit * (c_self + c_cross) - gp.rho

    mu = scipy.optimize.bisect(residual, 0.0, mu_max, xtol=BISECT_TOL, maxiter=200)
    c_self, c_cross = _single_agent_rhs(mu, n)
    root = math.sqrt(n - 1)
    # literal form of the dominance condition
    dominance = math.sinh(root * mu) > root * math.cosh(root * mu)
    return SingleAgentSolution(
        h=a - mu / scale, mu=mu, c_self=c_self, c_cross=c_cross, dominance=dominance
    )
