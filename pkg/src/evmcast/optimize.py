"""Derivative-free minimization: Nelder-Mead simplex descent.

Kept in-repo (no scipy.optimize) so the ARIMA estimator is fully
self-contained and its iteration path is deterministic and inspectable.
Standard coefficients: reflection 1, expansion 2, contraction 0.5,
shrink 0.5. Convergence is declared when the simplex diameter (largest
vertex-to-best distance, infinity norm) drops below `tol`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OptResult:
    x: np.ndarray
    fx: float
    iterations: int
    converged: bool


def nelder_mead(
    func,
    x0,
    step: float = 0.1,
    tol: float = 1e-8,
    max_iter: int = 2000,
) -> OptResult:
    """Minimize `func` starting from `x0`.

    The initial simplex is x0 plus one vertex per coordinate offset by
    `step`. Non-finite objective values are treated as +inf so the
    simplex walks away from them.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size

    def f(x):
        v = func(x)
        return float(v) if np.isfinite(v) else np.inf

    verts = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        v[i] += step
        verts.append(v)
    verts = np.array(verts)
    fvals = np.array([f(v) for v in verts])

    iterations = 0
    while iterations < max_iter:
        order = np.argsort(fvals, kind="stable")
        verts, fvals = verts[order], fvals[order]

        diameter = np.max(np.abs(verts[1:] - verts[0])) if n else 0.0
        if diameter < tol:
            return OptResult(verts[0].copy(), fvals[0], iterations, True)

        iterations += 1
        centroid = verts[:-1].mean(axis=0)
        worst = verts[-1]

        refl = centroid + (centroid - worst)
        f_refl = f(refl)
        if fvals[0] <= f_refl < fvals[-2]:
            verts[-1], fvals[-1] = refl, f_refl
            continue
        if f_refl < fvals[0]:
            expd = centroid + 2.0 * (centroid - worst)
            f_expd = f(expd)
            if f_expd < f_refl:
                verts[-1], fvals[-1] = expd, f_expd
            else:
                verts[-1], fvals[-1] = refl, f_refl
            continue
        # contraction: outside if the reflection improved on the worst
        if f_refl < fvals[-1]:
            contr = centroid + 0.5 * (refl - centroid)
            f_contr = f(contr)
            if f_contr <= f_refl:
                verts[-1], fvals[-1] = contr, f_contr
                continue
        else:
            contr = centroid + 0.5 * (worst - centroid)
            f_contr = f(contr)
            if f_contr < fvals[-1]:
                verts[-1], fvals[-1] = contr, f_contr
                continue
        # shrink toward the best vertex
        for i in range(1, n + 1):
            verts[i] = verts[0] + 0.5 * (verts[i] - verts[0])
            fvals[i] = f(verts[i])

    order = np.argsort(fvals, kind="stable")
    return OptResult(verts[order[0]].copy(), fvals[order[0]], iterations, False)
