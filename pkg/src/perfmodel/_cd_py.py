"""Pure-NumPy coordinate-descent sweep kernel (fallback backend)."""

from __future__ import annotations

import numpy as np


def sweep(X: np.ndarray, r: np.ndarray, b: np.ndarray, colsq: np.ndarray,
          lam: float, cols: np.ndarray) -> float:
    """One cyclic soft-threshold pass over `cols`; updates r and b in place.

    X is (n, m) float64 Fortran-ordered, r the current residual, b the
    coefficients, colsq[j] = <x_j, x_j>/n. Returns the largest absolute
    coefficient change of the pass.
    """
    n = X.shape[0]
    max_change = 0.0
    for j in cols:
        cj = colsq[j]
        if cj <= 0.0:
            continue
        xj = X[:, j]
        old = b[j]
        rho = xj.dot(r) / n + cj * old
        if rho > lam:
            new = (rho - lam) / cj
        elif rho < -lam:
            new = (rho + lam) / cj
        else:
            new = 0.0
        delta = new - old
        if delta != 0.0:
            r -= delta * xj
            b[j] = new
            change = abs(delta)
            if change > max_change:
                max_change = change
    return max_change
