"""The exact SI Markov chain on ``2^n`` infection states.

A susceptible node ``i`` becomes infected at rate ``beta * sum_j a_ij X_j`` where
``X_j`` is the infection indicator of node ``j``; infections are permanent. Initial
states are drawn independently, node ``i`` infected with probability ``x0_i``.

:func:`simulate_exact_ctmc` samples the chain with an event-driven scheme and
:func:`solve_exact_kolmogorov` integrates its forward equations for small networks.
"""

from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.sparse

from .dynamics import ODE_TOL, EpidemicParams
from .errors import ConvergenceError
from .network import Network

#: Largest network handled by the forward equations (4096 states).
MAX_KOLMOGOROV_NODES = 12


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample means of the infection indicators at ``t_bar`` and their standard errors."""

    estimate: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int


def _sample_stream(seed: int, index: int) -> np.random.Generator:
    # depends only on (seed, index), never on scheduling
    return np.random.default_rng([seed, index])


def _simulate_one(rates_matrix: np.ndarray, x0: np.ndarray, t_bar: float, rng) -> np.ndarray:
    n = x0.shape[0]
    infected = rng.random(n) < x0
    t = 0.0
    while True:
        rates = np.where(infected, 0.0, rates_matrix @ infected)
        total = rates.sum()
        if total <= 0:
            break
        t += rng.exponential(1.0 / total)
        if t > t_bar:
            break
        # pick the node to infect proportionally to its rate
        target = rng.random() * total
        i = min(int(np.searchsorted(np.cumsum(rates), target, side="right")), n - 1)
        while rates[i] == 0:
            i -= 1
        infected[i] = True
    return infected


def simulate_exact_ctmc(
    net: Network, params: EpidemicParams, samples: int, seed: int
) -> MonteCarloEstimate:
    """Monte Carlo estimate of the infection probabilities at ``t_bar``.

    Each sample uses its own random stream derived from ``(seed, sample index)``, so
    the result does not depend on how samples are scheduled.

    Parameters
    ----------
    net : Network
    params : EpidemicParams
    samples : int
        Number of independent runs, at least one.
    seed : int
        Nonnegative base seed.

    Returns
    -------
    MonteCarloEstimate
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    if params.n != net.n:
        raise ValueError(f"x0 has {params.n} entries but the network has {net.n} nodes")
    rates_matrix = params.beta * net.weights
    hits = np.zeros(net.n)
    for index in range(samples):
        rng = _sample_stream(seed, index)
        hits += _simulate_one(rates_matrix, params.x0, params.t_bar, rng)
    estimate = hits / samples
    stderr = np.sqrt(estimate * (1.0 - estimate) / samples)
    return MonteCarloEstimate(estimate=estimate, stderr=stderr, samples=samples, seed=seed)


def _state_bits(n: int) -> np.ndarray:
    states = np.arange(2**n)
    return (states[:, None] >> np.arange(n)[None, :]) & 1


def kolmogorov_generator(net: Network, beta: float) -> scipy.sparse.csr_array:
    """Transpose of the chain's generator, so that ``p' = Q^T p``.

    State ``s`` encodes node ``i`` as infected when bit ``i`` is set.
    """
    n = net.n
    bits = _state_bits(n)
    rates = (bits @ (beta * net.weights)) * (1 - bits)
    src, node = np.nonzero(rates)
    values = rates[src, node]
    dst = src | (1 << node)
    size = 2**n
    out_rates = rates.sum(axis=1)
    rows = np.concatenate([dst, np.arange(size)])
    cols = np.concatenate([src, np.arange(size)])
    data = np.concatenate([values, -out_rates])
    return scipy.sparse.csr_array((data, (rows, cols)), shape=(size, size))


def solve_exact_kolmogorov(net: Network, params: EpidemicParams) -> np.ndarray:
    """Exact infection probabilities at ``t_bar`` from the forward equations.

    Examples
    --------
    >>> from epigame.network import validate_network
    >>> net = validate_network([[0, 0], [0, 0]])
    >>> solve_exact_kolmogorov(net, EpidemicParams(1.0, 1.0, [0.5, 0.25]))
    array([0.5 , 0.25])
    """
    n = net.n
    if n > MAX_KOLMOGOROV_NODES:
        raise ValueError(
            f"forward equations limited to {MAX_KOLMOGOROV_NODES} nodes, got {n}"
        )
    if params.n != n:
        raise ValueError(f"x0 has {params.n} entries but the network has {n} nodes")
    bits = _state_bits(n)
    p0 = np.prod(np.where(bits == 1, params.x0, 1.0 - params.x0), axis=1)
    if params.t_bar == 0:
        return bits.T @ p0
    qt = kolmogorov_generator(net, params.beta)

    def rhs(t, p):
        return qt @ p

    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, params.t_bar),
        p0,
        method="DOP853",
        t_eval=[params.t_bar],
        rtol=ODE_TOL,
        atol=ODE_TOL * 1e-2,
    )
    if not sol.success:
        raise ConvergenceError(f"forward equations failed: {sol.message}")
    return bits.T @ sol.y[:, -1]
