"""Projected ascent on a box ``0 <= x <= cap``.

The iteration follows a (not necessarily integrable) ascent field ``g(x)``:

    x <- clip(x + s g(x), 0, cap)

with Barzilai-Borwein step lengths and a non-monotone acceptance test on the natural
residual ``||x - clip(x + g(x), 0, cap)||_inf``. For a concave objective this is
projected gradient ascent; for a decreasing field it finds the point where the
box-constrained first-order conditions hold.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .kkt import natural_residual

logger = logging.getLogger("epigame")

#: Stopping tolerance on the natural residual.
ASCENT_TOL = 1e-8
ASCENT_MAX_ITER = 100_000

_STEP_MIN = 1e-12
_STEP_MAX = 1e12
_MEMORY = 10


@dataclass(frozen=True)
class AscentResult:
    """Best iterate found, its residual and whether `tol` was reached."""

    x: np.ndarray
    residual: float
    iterations: int
    converged: bool


def projected_ascent(
    field: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cap: np.ndarray,
    tol: float = ASCENT_TOL,
    max_iter: int = ASCENT_MAX_ITER,
) -> AscentResult:
    """Run projected ascent from `x0` until the natural residual drops below `tol`.

    Non-convergence is not an error: the best iterate is returned with
    ``converged=False``.

    Examples
    --------
    >>> import numpy as np
    >>> res = projected_ascent(lambda x: 1.0 - x, np.zeros(2), np.array([0.5, 2.0]))
    >>> res.x.round(8).tolist(), res.converged
    ([0.5, 1.0], True)
    """
    cap = np.asarray(cap, dtype=np.float64)
    x = np.clip(np.asarray(x0, dtype=np.float64), 0.0, cap)
    if x.size == 0:
        return AscentResult(x, 0.0, 0, True)
    g = field(x)
    res = float(np.max(natural_residual(x, g, cap)))
    best_x, best_res = x, res
    history = [res]
    step = 1.0
    for it in range(max_iter):
        if res <= tol:
            return AscentResult(x, res, it, True)
        x_new = np.clip(x + step * g, 0.0, cap)
        g_new = field(x_new)
        res_new = float(np.max(natural_residual(x_new, g_new, cap)))
        if res_new < max(history) or step <= _STEP_MIN:
            s = x_new - x
            y = g_new - g
            sy = float(s @ y)
            # the field decreases along s for a concave objective
            step = float(s @ s) / -sy if sy < 0 else 2.0 * step
            step = min(max(step, _STEP_MIN), _STEP_MAX)
            x, g, res = x_new, g_new, res_new
            history = [*history[-(_MEMORY - 1):], res]
            if res < best_res:
                best_x, best_res = x, res
        else:
            step *= 0.5
    logger.warning("projected ascent stopped after %d iterations (residual %g)", max_iter, best_res)
    return AscentResult(best_x, best_res, max_iter, best_res <= tol)
