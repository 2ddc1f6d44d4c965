"""Utilities, costs and marginal utilities of the prophylactic investment game.

Agent ``i`` suffers the (log-linearised) infection exposure

    U_i = -delta_i * [exp(beta t_bar R W) W^{-1} x0]_i,   W = diag(1 - x0)

on the residual network ``R = A - sum_j D^j`` and pays ``rho`` per unit of investment
on each unordered link. The connectivity kernel ``C = beta t_bar exp(beta t_bar R W)``
counts discounted paths between agents; the marginal utility of investing in link
``{k, l}`` is read off it as ``delta_i (C_ik x0_l + C_il x0_k)``.

Examples
--------
>>> import numpy as np
>>> from epigame.network import complete
>>> from epigame.dynamics import EpidemicParams
>>> gp = GameParams(delta=1.0, epi=EpidemicParams(1.0, 1.0, [0.5, 0.5]), rho=0.1)
>>> round(utility(complete(2), None, gp, 0), 10)
-1.6487212707
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .compat import ensure_agent, ensure_link, ensure_vector, frozen
from .dynamics import EpidemicParams
from .network import (
    GLOBAL,
    LOCAL,
    MODES,
    AggregateInvestment,
    Network,
    StrategyProfile,
    residual_weights,
)

Investment = StrategyProfile | AggregateInvestment | None


@dataclass(frozen=True, eq=False)
class GameParams:
    """Disutility weights `delta`, contagion parameters `epi`, unit cost `rho`, `mode`.

    A scalar `delta` is broadcast to every agent.

    Examples
    --------
    >>> gp = GameParams(delta=1.0, epi=EpidemicParams(1.0, 1.0, [0.5, 0.5]), rho=-1.0)
    Traceback (most recent call last):
        ...
    ValueError: rho must be positive, got -1.0
    """

    delta: np.ndarray
    epi: EpidemicParams
    rho: float
    mode: str = GLOBAL

    def __post_init__(self):
        delta = ensure_vector(self.delta, self.epi.n, name="delta")
        if np.any(delta < 0):
            raise ValueError("delta entries must be nonnegative")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        object.__setattr__(self, "delta", frozen(delta))
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def n(self) -> int:
        return self.epi.n

    @property
    def local(self) -> bool:
        return self.mode == LOCAL

    @property
    def is_symmetric(self) -> bool:
        """Equal disutility weights and a homogeneous initial condition."""
        return self.epi.is_homogeneous and bool(np.all(self.delta == self.delta[0]))

    def replace(self, **changes) -> GameParams:
        fields = {"delta": self.delta, "epi": self.epi, "rho": self.rho, "mode": self.mode}
        fields.update(changes)
        return GameParams(**fields)

    def __eq__(self, other):
        if not isinstance(other, GameParams):
            return NotImplemented
        return (
            (self.rho, self.mode) == (other.rho, other.mode)
            and self.epi == other.epi
            and bool(np.array_equal(self.delta, other.delta))
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return (
            f"GameParams(delta={self.delta.tolist()!r}, epi={self.epi!r}, "
            f"rho={self.rho!r}, mode={self.mode!r})"
        )


@dataclass(frozen=True)
class ConnectivityKernel:
    """Kernel ``C = beta t_bar exp(beta t_bar R W)``; ``matrix[i, k]`` is ``C_ik``."""

    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _residual(net: Network, investment: Investment) -> np.ndarray:
    if investment is None:
        return np.array(net.weights)
    return residual_weights(net, investment)


def _check_sizes(net: Network, gp: GameParams):
    if gp.n != net.n:
        raise ValueError(f"game has {gp.n} agents but the network has {net.n} nodes")


def _exponential(residual: np.ndarray, gp: GameParams) -> np.ndarray:
    w = 1.0 - gp.epi.x0
    scale = gp.epi.beta * gp.epi.t_bar
    return scipy.linalg.expm(scale * residual * w[None, :])


def kernel_from_residual(residual: np.ndarray, gp: GameParams) -> np.ndarray:
    """Kernel matrix ``beta t_bar exp(beta t_bar R W)`` of a raw residual matrix `R`."""
    return gp.epi.beta * gp.epi.t_bar * _exponential(residual, gp)


def utilities_from_residual(residual: np.ndarray, gp: GameParams) -> np.ndarray:
    """Utilities of every agent on a raw residual interaction matrix.

    `residual` need not be symmetric; distancing policies produce row-normalised
    interaction matrices.
    """
    x0 = gp.epi.x0
    z = x0 / (1.0 - x0)
    return -gp.delta * (_exponential(residual, gp) @ z)


def utilities(net: Network, investment: Investment, gp: GameParams) -> np.ndarray:
    """Vector of ``U_i`` for every agent; `investment` may be None for no investment."""
    _check_sizes(net, gp)
    return utilities_from_residual(_residual(net, investment), gp)


def utility(net: Network, profile: Investment, gp: GameParams, i: int) -> float:
    """Utility ``U_i`` of agent `i`; never positive."""
    i = ensure_agent(i, gp.n)
    return float(utilities(net, profile, gp)[i])


def cost(profile: StrategyProfile, gp: GameParams, i: int) -> float:
    """Investment cost of agent `i`, charged once per unordered link.

    The cost is ``(rho / 2) 1^T D^i 1``, half the sum over all entries of ``D^i``: a
    link variable occupies two symmetric entries but is paid for once. Marginal
    utilities are summed over both entries in the same way, so that comparing them with
    `rho` gives the exact first-order conditions.

    Examples
    --------
    Half a unit on the single link of two agents, at ``rho = 2``; the entry sum
    ``rho (0.5 + 0.5)`` would give 2:

    >>> import numpy as np
    >>> d = np.zeros((2, 2, 2))
    >>> d[0] = [[0, 0.5], [0.5, 0]]
    >>> gp = GameParams(delta=1.0, epi=EpidemicParams(1.0, 1.0, [0.5, 0.5]), rho=2.0)
    >>> cost(StrategyProfile(d), gp, 0)
    1.0

    Full investment on the three unit links of a triangle at ``rho = 1`` costs 3, not
    the six unit entries:

    >>> from epigame.network import complete
    >>> d = np.zeros((3, 3, 3))
    >>> d[0] = complete(3).weights
    >>> gp3 = GameParams(delta=1.0, epi=EpidemicParams(1.0, 1.0, [0.5] * 3), rho=1.0)
    >>> cost(StrategyProfile(d), gp3, 0)
    3.0
    """
    i = ensure_agent(i, profile.n)
    return 0.5 * gp.rho * float(profile.per_agent[i].sum())


def payoff(net: Network, profile: StrategyProfile, gp: GameParams, i: int) -> float:
    return utility(net, profile, gp, i) - cost(profile, gp, i)


def payoffs(net: Network, profile: StrategyProfile, gp: GameParams) -> np.ndarray:
    """Payoffs of every agent."""
    costs = 0.5 * gp.rho * profile.per_agent.sum(axis=(1, 2))
    return utilities(net, profile, gp) - costs


def social_welfare(
    net: Network, aggregate: AggregateInvestment | StrategyProfile | None, gp: GameParams
) -> float:
    """Equally weighted welfare ``sum_i U_i - (rho / 2) 1^T D 1``.

    A strategy profile is reduced to its aggregate first; welfare depends on nothing else.
    """
    if aggregate is None:
        aggregate = AggregateInvestment.zeros(net.n)
    if isinstance(aggregate, StrategyProfile):
        total = aggregate.total()
    else:
        total = aggregate.total
    welfare = float(utilities(net, aggregate, gp).sum())
    return welfare - 0.5 * gp.rho * float(total.sum())


def connectivity(net: Network, investment: Investment, gp: GameParams) -> ConnectivityKernel:
    """Connectivity kernel of the residual network.

    Examples
    --------
    >>> from epigame.network import validate_network
    >>> gp = GameParams(delta=1.0, epi=EpidemicParams(2.0, 0.5, [0.5, 0.5]), rho=1.0)
    >>> connectivity(validate_network([[0, 0], [0, 0]]), None, gp).matrix
    array([[1., 0.],
           [0., 1.]])
    """
    _check_sizes(net, gp)
    return ConnectivityKernel(frozen(kernel_from_residual(_residual(net, investment), gp)))


def marginal_utility_matrix(net: Network, investment: Investment, gp: GameParams) -> np.ndarray:
    """Kernel marginal utilities ``mu[i, k, l] = delta_i (C_ik x0_l + C_il x0_k)``.

    The result is symmetric in ``(k, l)``. Diagonal entries ``k == l`` carry no meaning.
    """
    c = connectivity(net, investment, gp).matrix
    x0 = gp.epi.x0
    paths = c[:, :, None] * x0[None, None, :] + c[:, None, :] * x0[None, :, None]
    return gp.delta[:, None, None] * paths


def marginal_utility(
    net: Network, investment: Investment, gp: GameParams, i: int, link
) -> float:
    """Marginal utility of agent `i` for investment on `link`; never negative."""
    i = ensure_agent(i, gp.n)
    k, l = ensure_link(link, gp.n)  # noqa: E741
    c = connectivity(net, investment, gp).matrix
    x0 = gp.epi.x0
    return float(gp.delta[i] * (c[i, k] * x0[l] + c[i, l] * x0[k]))


def link_marginal_sums(net: Network, investment: Investment, gp: GameParams) -> np.ndarray:
    """``sum_i mu[i, k, l]``, the per-link marginal welfare of the planner."""
    return marginal_utility_matrix(net, investment, gp).sum(axis=0)


def exact_marginal_utility(
    net: Network, investment: Investment, gp: GameParams, i: int, link
) -> float:
    """Derivative of ``U_i`` with respect to the investment on `link`.

    Differentiates the matrix exponential through its Frechet derivative, so it also holds
    where the kernel expression is only a first-order surrogate.
    """
    _check_sizes(net, gp)
    i = ensure_agent(i, gp.n)
    k, l = ensure_link(link, gp.n)  # noqa: E741
    x0 = gp.epi.x0
    w = 1.0 - x0
    scale = gp.epi.beta * gp.epi.t_bar
    m = scale * _residual(net, investment) * w[None, :]
    direction = np.zeros_like(m)
    direction[k, l] = scale * w[l]
    direction[l, k] = scale * w[k]
    frechet = scipy.linalg.expm_frechet(m, direction, compute_expm=False)
    return float(gp.delta[i] * (frechet @ (x0 / w))[i])


def welfare_gradient_from_residual(residual: np.ndarray, gp: GameParams) -> np.ndarray:
    """Exact ``d (sum_i U_i) / d d_{k,l}`` for every link of a raw residual matrix.

    With ``M = beta t_bar R W`` and ``sum_i U_i = -delta^T exp(M) z``, one Frechet
    derivative of the exponential at ``M^T`` in direction ``delta z^T`` gives the
    gradient with respect to every entry of ``M`` at once.
    """
    x0 = gp.epi.x0
    w = 1.0 - x0
    scale = gp.epi.beta * gp.epi.t_bar
    m = scale * residual * w[None, :]
    g = scipy.linalg.expm_frechet(m.T, np.outer(gp.delta, x0 / w), compute_expm=False)
    half = scale * g * w[None, :]
    grad = half + half.T
    np.fill_diagonal(grad, 0.0)
    return grad


def welfare_gradient(net: Network, investment: Investment, gp: GameParams) -> np.ndarray:
    """Exact marginal welfare ``sum_i dU_i / d d_{k,l}`` of every link, as a matrix.

    This is the sum over agents of :func:`exact_marginal_utility` and the planner's
    ascent direction. The diagonal is zero. In symmetric games along uniform
    investment on (a)-complete networks it agrees with :func:`link_marginal_sums`.

    Examples
    --------
    >>> from epigame.network import complete
    >>> gp = GameParams(delta=1.0, epi=EpidemicParams(1.0, 2.0, [0.5, 0.5]), rho=1.0)
    >>> exact = welfare_gradient(complete(2), None, gp)[0, 1]
    >>> kernel = link_marginal_sums(complete(2), None, gp)[0, 1]
    >>> bool(np.isclose(exact, kernel))
    True
    """
    _check_sizes(net, gp)
    return welfare_gradient_from_residual(_residual(net, investment), gp)


def homogeneous_derivative_identity(
    net: Network, investment: Investment, gp: GameParams, agent: int | None, subset
) -> tuple[float, float]:
    """Both sides of the homogeneous-game identity over the node subset `subset`.

    ``lhs = 2 sum_{k, l in subset} delta_i C_ik x0_l`` and
    ``rhs = -2 |subset| beta t_bar (1 - alpha) U_i``. With ``agent=None`` both sides
    are summed over all agents, which is the planner's version of the identity.
    """
    alpha = gp.epi.alpha
    nodes = sorted({ensure_agent(v, gp.n) for v in subset})
    agents = list(range(gp.n)) if agent is None else [ensure_agent(agent, gp.n)]
    if not nodes:
        return 0.0, 0.0
    c = connectivity(net, investment, gp).matrix
    u = utilities(net, investment, gp)
    x0 = gp.epi.x0
    lhs = 2.0 * float(np.sum(gp.delta[agents, None] * c[agents, :] * x0[nodes].sum()))
    scale = gp.epi.beta * gp.epi.t_bar * (1.0 - alpha)
    rhs = -2.0 * len(nodes) * scale * float(u[agents].sum())
    return lhs, rhs
