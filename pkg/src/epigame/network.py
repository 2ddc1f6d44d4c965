"""Weighted contact networks, investment profiles and the feasibility geometry that ties
them together.

A :class:`Network` holds a symmetric, nonnegative adjacency matrix with zero diagonal.
Agents reduce the contagiousness of links by investing: agent ``i`` chooses a symmetric
matrix ``D^i`` and the game is played on the residual network ``A - sum_i D^i``.

Examples
--------
>>> import numpy as np
>>> from epigame.network import complete, StrategyProfile, aggregate, residual_network
>>> net = complete(3, weight=1.0)
>>> profile = StrategyProfile.zeros(3)
>>> residual_network(net, profile) == net
True
>>> aggregate(profile, net).total.sum()
np.float64(0.0)

"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .compat import ensure_float_array, ensure_link, ensure_square_matrix, frozen
from .errors import InfeasibleProfileError, NetworkValidationError

#: Tolerance on the asymmetry of ingested weights.
SYMMETRY_TOL = 1e-12

#: Absolute slack allowed when checking ``sum_i D^i <= A``.
FEASIBILITY_TOL = 1e-12

GLOBAL = "global"
LOCAL = "local"
MODES = (GLOBAL, LOCAL)


@dataclass(frozen=True, eq=False)
class Network:
    """Symmetric nonnegative weighted adjacency matrix with zero diagonal.

    Use :func:`validate_network` to build one from raw input; the constructor trusts
    that its argument has already been checked.
    """

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", frozen(np.array(self.weights, dtype=np.float64)))

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def links(self) -> list[tuple[int, int]]:
        """Unordered links ``(k, l)``, ``k < l``, with strictly positive weight."""
        ks, ls = np.nonzero(np.triu(self.weights, k=1) > 0)
        return [(int(k), int(l)) for k, l in zip(ks, ls, strict=True)]  # noqa: E741

    def to_graph(self) -> nx.Graph:
        """The positive-weight undirected graph as a :class:`networkx.Graph`."""
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        edges = [(k, l, self.weights[k, l]) for k, l in self.links()]  # noqa: E741
        graph.add_weighted_edges_from(edges)
        return graph

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.weights.shape == other.weights.shape and bool(
            np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"Network(n={self.n}, links={len(self.links())})"


def validate_network(weights) -> Network:
    """Check a raw weighted adjacency matrix and return a :class:`Network`.

    The matrix is symmetrised (averaged with its transpose) after validation, so that
    round-off asymmetries below :data:`SYMMETRY_TOL` do not leak into computations.
    Irreducibility is not required; see :func:`is_irreducible`.

    Parameters
    ----------
    weights : array-like
        Square matrix of contagiousness weights.

    Returns
    -------
    net : Network

    Examples
    --------
    >>> validate_network([[0, 1], [1, 0]])
    Network(n=2, links=1)
    >>> validate_network([[1, 0], [0, 0]])
    Traceback (most recent call last):
        ...
    NetworkValidationError: weights must have a zero diagonal
    """
    try:
        arr = ensure_square_matrix(weights, name="weights")
    except ValueError as e:
        raise NetworkValidationError(str(e)) from e
    if arr.shape[0] < 2:
        raise NetworkValidationError(f"a network needs at least 2 agents, got {arr.shape[0]}")
    asymmetry = float(np.max(np.abs(arr - arr.T)))
    if asymmetry > SYMMETRY_TOL:
        raise NetworkValidationError(f"weights are not symmetric (max asymmetry {asymmetry})")
    if np.any(arr < 0):
        raise NetworkValidationError("weights must be nonnegative")
    if np.any(np.diag(arr) != 0):
        raise NetworkValidationError("weights must have a zero diagonal")
    return Network(0.5 * (arr + arr.T))


def is_irreducible(net: Network) -> bool:
    """True iff the graph of strictly positive weights is connected.

    >>> is_irreducible(validate_network([[0, 1, 0], [1, 0, 0], [0, 0, 0]]))
    False
    """
    return nx.is_connected(net.to_graph())


def is_aperiodic(net: Network) -> bool:
    """True iff the positive-weight graph contains an odd cycle.

    Only defined for irreducible networks.

    >>> is_aperiodic(cycle(4))
    False
    >>> is_aperiodic(complete(4))
    True
    """
    graph = net.to_graph()
    if not nx.is_connected(graph):
        raise NetworkValidationError("aperiodicity is undefined for a reducible network")
    return not nx.is_bipartite(graph)


# builtin constructors


def complete(n: int, weight: float = 1.0) -> Network:
    """The (a)-complete network: every pair of distinct agents linked with `weight`."""
    weights = np.full((n, n), float(weight))
    np.fill_diagonal(weights, 0.0)
    return validate_network(weights)


def cycle(n: int, weight: float = 1.0) -> Network:
    """Ring ``0 - 1 - ... - (n-1) - 0``."""
    weights = np.zeros((n, n))
    for k in range(n):
        l = (k + 1) % n  # noqa: E741
        weights[k, l] = weights[l, k] = weight
    return validate_network(weights)


def star(n: int, weight: float = 1.0, centre: int = 0) -> Network:
    """Star network with hub `centre` linked to every other agent."""
    weights = np.zeros((n, n))
    weights[centre, :] = weights[:, centre] = weight
    weights[centre, centre] = 0.0
    return validate_network(weights)


# investments


def _check_investment_matrix(d: np.ndarray, what: str):
    if np.any(d < 0):
        raise InfeasibleProfileError(f"{what} has negative entries")
    if np.any(np.diag(d) != 0):
        raise InfeasibleProfileError(f"{what} must have a zero diagonal")
    if np.max(np.abs(d - d.T), initial=0.0) > SYMMETRY_TOL:
        raise InfeasibleProfileError(f"{what} is not symmetric")


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """One symmetric nonnegative investment matrix per agent.

    ``per_agent[i]`` is ``D^i``; the array has shape ``(n, n, n)``. When `local` is set the
    profile belongs to the local game and agent ``i`` may only invest in links ``{i, j}``.
    """

    per_agent: np.ndarray
    local: bool = False

    def __post_init__(self):
        arr = ensure_float_array(self.per_agent, name="per_agent")
        if arr.ndim != 3 or not arr.shape[0] == arr.shape[1] == arr.shape[2]:
            raise InfeasibleProfileError(f"profile must have shape (n, n, n), got {arr.shape}")
        for i, d in enumerate(arr):
            _check_investment_matrix(d, f"D^{i}")
        if self.local:
            support = _local_support(arr.shape[0])
            if np.any(arr[~support] != 0):
                raise InfeasibleProfileError("local profile invests in a non-incident link")
        arr = 0.5 * (arr + np.transpose(arr, (0, 2, 1)))
        object.__setattr__(self, "per_agent", frozen(arr))

    @classmethod
    def zeros(cls, n: int, local: bool = False) -> StrategyProfile:
        return cls(np.zeros((n, n, n)), local=local)

    @property
    def n(self) -> int:
        return self.per_agent.shape[0]

    def total(self) -> np.ndarray:
        """Entrywise sum of the ``D^i`` without any feasibility check."""
        return self.per_agent.sum(axis=0)

    def replace(self, i: int, d: np.ndarray) -> StrategyProfile:
        """A copy of this profile with ``D^i`` replaced by `d`."""
        arr = np.array(self.per_agent)
        arr[i] = d
        return StrategyProfile(arr, local=self.local)

    def __eq__(self, other):
        if not isinstance(other, StrategyProfile):
            return NotImplemented
        return self.local == other.local and bool(np.array_equal(self.per_agent, other.per_agent))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"StrategyProfile(n={self.n}, local={self.local})"


@dataclass(frozen=True, eq=False)
class AggregateInvestment:
    """Total investment ``D = sum_i D^i``: symmetric, nonnegative, zero diagonal."""

    total: np.ndarray

    def __post_init__(self):
        arr = ensure_square_matrix(self.total, name="total")
        _check_investment_matrix(arr, "aggregate")
        object.__setattr__(self, "total", frozen(0.5 * (arr + arr.T)))

    @classmethod
    def zeros(cls, n: int) -> AggregateInvestment:
        return cls(np.zeros((n, n)))

    @property
    def n(self) -> int:
        return self.total.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AggregateInvestment):
            return NotImplemented
        return bool(np.array_equal(self.total, other.total))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"AggregateInvestment(n={self.n}, sum={float(self.total.sum())!r})"


def _local_support(n: int) -> np.ndarray:
    """Boolean ``(n, n, n)`` mask of the entries agent ``i`` may use in the local game."""
    idx = np.arange(n)
    i = idx[:, None, None]
    k = idx[None, :, None]
    l = idx[None, None, :]  # noqa: E741
    return ((k == i) | (l == i)) & (k != l)


def _check_fits(net: Network, total: np.ndarray):
    if total.shape != net.weights.shape:
        raise InfeasibleProfileError(
            f"investment has {total.shape[0]} agents but the network has {net.n}"
        )
    excess = float(np.max(total - net.weights))
    if excess > FEASIBILITY_TOL * max(1.0, float(np.max(net.weights))):
        raise InfeasibleProfileError(f"investment exceeds the network weights by {excess}")


def check_feasible(net: Network, investment: StrategyProfile | AggregateInvestment):
    """Raise :class:`InfeasibleProfileError` unless `investment` fits inside `net`."""
    if isinstance(investment, StrategyProfile):
        _check_fits(net, investment.total())
    else:
        _check_fits(net, investment.total)


def aggregate(profile: StrategyProfile, net: Network | None = None) -> AggregateInvestment:
    """Entrywise sum of the investment matrices of `profile`.

    If `net` is given the sum is checked against its weights.

    Examples
    --------
    >>> import numpy as np
    >>> d = np.zeros((2, 2, 2))
    >>> d[0] = d[1] = [[0, 0.25], [0.25, 0]]
    >>> aggregate(StrategyProfile(d)).total
    array([[0. , 0.5],
           [0.5, 0. ]])
    """
    total = profile.total()
    if net is not None:
        _check_fits(net, total)
        total = np.minimum(total, net.weights)
    return AggregateInvestment(total)


def residual_weights(net: Network, investment: StrategyProfile | AggregateInvestment) -> np.ndarray:
    """``A - sum_i D^i`` as a plain array, clipped at zero inside the feasibility slack."""
    if isinstance(investment, StrategyProfile):
        total = investment.total()
    else:
        total = investment.total
    _check_fits(net, total)
    return np.maximum(net.weights - total, 0.0)


def residual_network(net: Network, investment: StrategyProfile | AggregateInvestment) -> Network:
    """The network left after investments: weights ``A - sum_i D^i``."""
    return Network(residual_weights(net, investment))


def localize_profile(
    total: AggregateInvestment,
    eligibility: Mapping[tuple[int, int], Iterable[int]],
    local: bool = False,
) -> StrategyProfile:
    """Split each link's investment among the agents eligible to carry it.

    Every eligible agent receives an equal share. The lowest-index agent takes the
    rounding remainder, so the aggregate is reproduced exactly.

    Parameters
    ----------
    total : AggregateInvestment
        Investment to distribute.
    eligibility : mapping
        Link ``(k, l)`` to the agents allowed to invest in it. Links with zero
        investment may be omitted.
    local : bool
        Build a local-game profile; eligible sets must then be subsets of ``{k, l}``.

    Returns
    -------
    profile : StrategyProfile

    Examples
    --------
    >>> import numpy as np
    >>> t = AggregateInvestment(np.array([[0, 0.6], [0.6, 0]]))
    >>> p = localize_profile(t, {(0, 1): [0, 1]})
    >>> p.per_agent[:, 0, 1]
    array([0.3, 0.3])
    """
    n = total.n
    eligible = {ensure_link(link, n): sorted({int(i) for i in agents})
                for link, agents in eligibility.items()}
    arr = np.zeros((n, n, n))
    ks, ls = np.nonzero(np.triu(total.total, k=1) > 0)
    for k, l in zip(ks.tolist(), ls.tolist(), strict=True):  # noqa: E741
        agents = eligible.get((k, l), [])
        if not agents:
            raise InfeasibleProfileError(f"no eligible agent for link ({k}, {l})")
        if local and not set(agents) <= {k, l}:
            raise InfeasibleProfileError(
                f"local game: link ({k}, {l}) can only be carried by its endpoints"
            )
        value = total.total[k, l]
        share = value / len(agents)
        for i in agents[1:]:
            arr[i, k, l] = arr[i, l, k] = share
        first = agents[0]
        arr[first, k, l] = arr[first, l, k] = value - share * (len(agents) - 1)
    return StrategyProfile(arr, local=local)
