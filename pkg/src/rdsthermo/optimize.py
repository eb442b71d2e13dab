"""Derivative-free minimization (Nelder-Mead) with an iteration trace."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class NMResult:
    x: np.ndarray
    fun: float
    evals: int
    converged: bool
    trace: list = field(default_factory=list)  # (iteration, best value, simplex diameter)


def simplex_diameter(simplex: np.ndarray) -> float:
    diffs = simplex[:, None, :] - simplex[None, :, :]
    return float(np.sqrt((diffs**2).sum(axis=2)).max())


def nelder_mead(f, x0, *, step=0.5, max_evals=2000, tol=1e-8,
                alpha=1.0, gamma=2.0, rho=0.5, sigma=0.5) -> NMResult:
    """Minimize ``f`` from ``x0``; stops when the simplex diameter drops below ``tol``.

    ``f`` may return ``inf``. Sorting is stable, so ties keep vertex order.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    dim = x0.size
    if dim == 0:
        return NMResult(x0, float(f(x0)), 1, True, [(0, float(f(x0)), 0.0)])
    simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(dim)])
    vals = np.array([f(x) for x in simplex], dtype=np.float64)
    evals = dim + 1
    trace = []
    it = 0
    converged = False
    while True:
        order = np.argsort(vals, kind="stable")
        simplex, vals = simplex[order], vals[order]
        diam = simplex_diameter(simplex)
        trace.append((it, float(vals[0]), diam))
        if diam < tol:
            converged = True
            break
        if evals >= max_evals:
            break
        it += 1
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = f(xr)
        evals += 1
        if vals[0] <= fr < vals[-2]:
            simplex[-1], vals[-1] = xr, fr
            continue
        if fr < vals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = f(xe)
            evals += 1
            if fe < fr:
                simplex[-1], vals[-1] = xe, fe
            else:
                simplex[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = centroid + rho * (xr - centroid)
        else:
            xc = centroid + rho * (simplex[-1] - centroid)
        fc = f(xc)
        evals += 1
        if fc < min(fr, vals[-1]):
            simplex[-1], vals[-1] = xc, fc
            continue
        for i in range(1, dim + 1):
            simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
            vals[i] = f(simplex[i])
        evals += dim
    return NMResult(simplex[0].copy(), float(vals[0]), evals, converged, trace)
