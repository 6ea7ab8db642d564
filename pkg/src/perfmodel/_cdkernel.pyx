# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled coordinate-descent sweep kernel (hot loop of the Lasso solver)."""

import numpy as np

cimport numpy as cnp


def sweep(const double[::1, :] X, double[::1] r, double[::1] b,
          const double[::1] colsq, double lam, const cnp.intp_t[::1] cols):
    """Same contract as the NumPy fallback: one cyclic pass over `cols`."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t nc = cols.shape[0]
    cdef Py_ssize_t i, k, j
    cdef double rho, old, new, delta, change, cj
    cdef double max_change = 0.0
    cdef double inv_n = 1.0 / n
    with nogil:
        for k in range(nc):
            j = cols[k]
            cj = colsq[j]
            if cj <= 0.0:
                continue
            old = b[j]
            rho = 0.0
            for i in range(n):
                rho += X[i, j] * r[i]
            rho = rho * inv_n + cj * old
            if rho > lam:
                new = (rho - lam) / cj
            elif rho < -lam:
                new = (rho + lam) / cj
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                for i in range(n):
                    r[i] -= delta * X[i, j]
                b[j] = new
                change = delta if delta > 0.0 else -delta
                if change > max_change:
                    max_change = change
    return max_change
