"""Deterministic SI dynamics on a weighted network.

Node ``i`` holds the probability ``x_i(t)`` of being infected at time ``t``. This module
provides the mean-field ODE, its linearisation, the closed-form upper bound obtained
through the transform ``y = -log(1 - x)``, and a rank-one spectral surrogate of the
matrix exponential. The stochastic chain itself lives in :mod:`epigame.markov`.

For every network and valid parameters the three trajectories are ordered
componentwise, mean field <= upper bound <= linearised.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.integrate
import scipy.linalg

from .compat import ensure_square_matrix, ensure_vector, frozen
from .errors import ConvergenceError, NetworkValidationError
from .network import Network, is_aperiodic, is_irreducible

logger = logging.getLogger("epigame")

#: Number of points on the output time grid.
DEFAULT_GRID = 257

#: Relative and absolute tolerance of the adaptive Runge-Kutta integrator.
ODE_TOL = 1e-10

#: Slack on the [0, 1] assertion for integrated probabilities.
BOUNDS_TOL = 1e-8

POWER_TOL = 1e-10
POWER_MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class EpidemicParams:
    """Contagion rate `beta`, horizon `t_bar` and initial infection probabilities `x0`.

    Examples
    --------
    >>> EpidemicParams(beta=1.0, t_bar=1.0, x0=[0.5, 0.0])
    EpidemicParams(beta=1.0, t_bar=1.0, x0=[0.5, 0.0])
    >>> EpidemicParams(beta=1.0, t_bar=1.0, x0=[0.0, 0.0])
    Traceback (most recent call last):
        ...
    ValueError: x0 must have at least one positive entry
    """

    beta: float
    t_bar: float
    x0: np.ndarray

    def __post_init__(self):
        x0 = np.atleast_1d(np.array(self.x0, dtype=np.float64))
        if x0.ndim != 1:
            raise ValueError("x0 must be a vector")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.t_bar >= 0:
            raise ValueError(f"t_bar must be nonnegative, got {self.t_bar}")
        if np.any(x0 < 0) or np.any(x0 >= 1):
            raise ValueError("x0 entries must lie in [0, 1)")
        if not np.max(x0) > 0:
            raise ValueError("x0 must have at least one positive entry")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "t_bar", float(self.t_bar))
        object.__setattr__(self, "x0", frozen(x0))

    @classmethod
    def homogeneous(cls, beta: float, t_bar: float, alpha: float, n: int) -> EpidemicParams:
        return cls(beta=beta, t_bar=t_bar, x0=ensure_vector(alpha, n, name="x0"))

    @property
    def n(self) -> int:
        return self.x0.shape[0]

    @property
    def is_homogeneous(self) -> bool:
        return bool(np.all(self.x0 == self.x0[0]))

    @property
    def alpha(self) -> float:
        """The common initial probability of a homogeneous instance."""
        if not self.is_homogeneous:
            raise ValueError("x0 is not homogeneous")
        return float(self.x0[0])

    def with_horizon(self, t_bar: float) -> EpidemicParams:
        return EpidemicParams(beta=self.beta, t_bar=t_bar, x0=self.x0)

    def __eq__(self, other):
        if not isinstance(other, EpidemicParams):
            return NotImplemented
        return (self.beta, self.t_bar) == (other.beta, other.t_bar) and bool(
            np.array_equal(self.x0, other.x0)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        return f"EpidemicParams(beta={self.beta!r}, t_bar={self.t_bar!r}, x0={self.x0.tolist()!r})"


@dataclass(frozen=True)
class Trajectory:
    """Values of a node-probability vector on a time grid.

    ``values[j]`` is the state at ``times[j]``. For the closed-form bound,
    `log_values` holds the transformed state ``y = -log(1 - x)``.
    """

    times: np.ndarray
    values: np.ndarray
    log_values: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


@dataclass(frozen=True)
class SpectralApprox:
    """Perron eigenpair of a network and the rank-one surrogate of its exponential."""

    mu1: float
    mu2: float
    v: np.ndarray
    rank_one: np.ndarray

    @property
    def gap(self) -> float:
        return abs(self.mu1 - self.mu2)


def _check_sizes(net: Network, params: EpidemicParams):
    if params.n != net.n:
        raise ValueError(f"x0 has {params.n} entries but the network has {net.n} nodes")


def time_grid(t_bar: float, points: int = DEFAULT_GRID) -> np.ndarray:
    if points < 2:
        raise ValueError(f"a time grid needs at least 2 points, got {points}")
    return np.linspace(0.0, t_bar, points)


def matrix_exponential(m) -> np.ndarray:
    """Exponential of a square real matrix.

    Uses scaling and squaring with a Pade approximant, so defective matrices are handled
    as well as diagonalisable ones.

    Examples
    --------
    >>> matrix_exponential([[0.0, 0.0], [0.0, 0.0]])
    array([[1., 0.],
           [0., 1.]])
    >>> matrix_exponential([[0.0, float('nan')], [0.0, 0.0]])
    Traceback (most recent call last):
        ...
    ValueError: matrix has non-finite entries
    """
    return scipy.linalg.expm(ensure_square_matrix(m))


def integrate_mean_field(
    net: Network, params: EpidemicParams, grid: int = DEFAULT_GRID
) -> Trajectory:
    """Integrate the mean-field system ``x_i' = (1 - x_i) beta sum_j a_ij x_j``.

    The solution is sampled on `grid` evenly spaced points of ``[0, t_bar]``.
    """
    _check_sizes(net, params)
    times = time_grid(params.t_bar, grid)
    if params.t_bar == 0:
        return Trajectory(times, np.tile(params.x0, (grid, 1)))

    a = net.weights * params.beta

    def rhs(t, x):
        return (1.0 - x) * (a @ x)

    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, params.t_bar),
        np.array(params.x0),
        method="DOP853",
        t_eval=times,
        rtol=ODE_TOL,
        atol=ODE_TOL,
    )
    if not sol.success:
        raise ConvergenceError(f"mean-field integration failed: {sol.message}")
    values = sol.y.T
    # probabilities are never projected back into [0, 1]
    if np.min(values) < -BOUNDS_TOL or np.max(values) > 1 + BOUNDS_TOL:
        raise ConvergenceError("mean-field solution left [0, 1]")
    return Trajectory(times, values)


def linearized_solution(
    net: Network, params: EpidemicParams, grid: int = DEFAULT_GRID
) -> Trajectory:
    """Solution ``exp(beta t A) x0`` of the linearised dynamics.

    Values are an upper bound on infection probabilities and may exceed one.
    """
    _check_sizes(net, params)
    times = time_grid(params.t_bar, grid)
    a = params.beta * net.weights
    values = np.array([matrix_exponential(t * a) @ params.x0 for t in times])
    return Trajectory(times, values)


def closed_form_upper_bound(
    net: Network, params: EpidemicParams, grid: int = DEFAULT_GRID
) -> Trajectory:
    """Closed-form upper bound on the mean-field solution.

    In the transformed variable ``y = -log(1 - x)``::

        y(t) = -log(1 - x0) + [exp(beta t A W) - I] W^{-1} x0,   W = diag(1 - x0)

    and ``x = 1 - exp(-y)``. Both are returned: `values` holds ``x`` and `log_values`
    holds ``y``.
    """
    _check_sizes(net, params)
    x0 = params.x0
    w = 1.0 - x0
    z = x0 / w
    aw = net.weights * w[None, :]
    y0 = -np.log1p(-x0)
    times = time_grid(params.t_bar, grid)
    ys = np.array([y0 + matrix_exponential(params.beta * t * aw) @ z - z for t in times])
    return Trajectory(times, -np.expm1(-ys), log_values=ys)


def _power_iteration(m: np.ndarray, start: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of a symmetric matrix with nonnegative spectrum."""
    x = start / np.linalg.norm(start)
    for it in range(POWER_MAX_ITER):
        y = m @ x
        lam = float(x @ y)
        res = float(np.linalg.norm(y - lam * x))
        if res <= POWER_TOL * max(1.0, abs(lam)):
            logger.debug("power iteration converged after %d iterations", it)
            return lam, x
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0, x
        x = y / norm
    raise ConvergenceError(f"power iteration did not converge in {POWER_MAX_ITER} iterations")


def _extreme_eigenvalues(m: np.ndarray, start: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Largest and smallest eigenvalues of symmetric `m`, via shifted power iterations."""
    shift = float(np.max(np.abs(m).sum(axis=1)))
    eye = np.eye(m.shape[0])
    top, vec = _power_iteration(m + shift * eye, start)
    bottom, _ = _power_iteration(shift * eye - m, start)
    return top - shift, vec, shift - bottom


def spectral_approximation(
    net: Network, params: EpidemicParams, require_aperiodic: bool = True
) -> SpectralApprox:
    """Rank-one surrogate ``exp(beta t_bar (1 - alpha) mu1) v v^T`` of the exponential.

    `net` is usually a residual network. It must be irreducible and aperiodic, and
    `params` must have a homogeneous ``x0 = alpha``. On a bipartite network ``-mu1`` is an
    eigenvalue too and the surrogate does not approach the exponential; pass
    ``require_aperiodic=False`` to compute the spectrum anyway. The Perron eigenvalue `mu1`
    and its eigenvector `v` come from power iteration. `mu2`, the second eigenvalue in
    modulus, comes from the same iteration on the deflated matrix ``A - mu1 v v^T``.

    Examples
    --------
    >>> from epigame.network import complete
    >>> params = EpidemicParams(1.0, 1.0, [0.5, 0.5])
    >>> s = spectral_approximation(complete(2), params, require_aperiodic=False)
    >>> round(s.mu1, 10), round(s.mu2, 10)
    (1.0, -1.0)
    >>> spectral_approximation(complete(2), params)
    Traceback (most recent call last):
        ...
    epigame.errors.NetworkValidationError: spectral approximation needs an aperiodic network
    """
    _check_sizes(net, params)
    alpha = params.alpha
    if not is_irreducible(net):
        raise NetworkValidationError("spectral approximation needs an irreducible network")
    if require_aperiodic and not is_aperiodic(net):
        raise NetworkValidationError("spectral approximation needs an aperiodic network")
    a = net.weights
    n = net.n
    mu1, v, _ = _extreme_eigenvalues(a, np.ones(n))
    # Perron vector has positive entries
    v = v * np.sign(v.sum())
    deflated = a - mu1 * np.outer(v, v)
    start = np.random.default_rng(0).normal(size=n)
    top, _, bottom = _extreme_eigenvalues(deflated, start)
    mu2 = top if abs(top) >= abs(bottom) else bottom
    scale = params.beta * params.t_bar * (1.0 - alpha)
    rank_one = np.exp(scale * mu1) * np.outer(v, v)
    return SpectralApprox(mu1=mu1, mu2=mu2, v=v, rank_one=rank_one)


def write_trajectory_csv(traj: Trajectory, path: str | os.PathLike):
    """Write `traj` as CSV with header ``t,x_1,...,x_n``."""
    frame = pd.DataFrame(traj.values, columns=[f"x_{i + 1}" for i in range(traj.n)])
    frame.insert(0, "t", traj.times)
    frame.to_csv(path, index=False, lineterminator="\n")
