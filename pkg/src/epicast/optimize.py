"""Derivative-free minimization shared by the ARIMA and ETS fitters.

Thin wrapper over scipy's Nelder-Mead: absolute-step initial simplex
(keeps fits shift-equivariant), one deterministic restart from a
perturbed best point, convergence on simplex diameter.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .errors import ContractError


def _initial_simplex(x0, steps):
    x0 = np.asarray(x0, dtype=float)
    simplex = np.tile(x0, (x0.size + 1, 1))
    for i in range(x0.size):
        simplex[i + 1, i] += steps[i]
    return simplex


def minimize_simplex(fn, x0, steps=None, maxiter: int = 2000, xatol: float = 1e-7):
    """Minimize fn from x0.  Returns (x_best, f_best, converged).

    `steps` sets the per-coordinate initial simplex edge lengths (scalar
    or array); a single restart is taken from the best point nudged by a
    quarter step, and the better of the two runs wins.
    """
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ContractError("non-finite starting point")
    if x0.size == 0:
        return x0, float(fn(x0)), True
    if steps is None:
        steps = 0.1
    steps = np.broadcast_to(np.asarray(steps, dtype=float), x0.shape).copy()
    steps[steps == 0] = 0.1

    def run(start, start_steps):
        return minimize(
            fn, start, method="Nelder-Mead",
            options={
                "initial_simplex": _initial_simplex(start, start_steps),
                "xatol": xatol, "fatol": 1e-12,
                "maxiter": maxiter, "maxfev": 4 * maxiter,
            },
        )

    res = run(x0, steps)
    best_x, best_f, ok = res.x, float(res.fun), bool(res.success)
    res2 = run(best_x + 0.25 * steps, 0.25 * steps)
    if float(res2.fun) < best_f:
        best_x, best_f, ok = res2.x, float(res2.fun), bool(res2.success)
    return np.asarray(best_x, dtype=float), best_f, ok
