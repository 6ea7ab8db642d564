"""Sparse linear regression engine.

Column standardization, Lasso via cyclic coordinate descent with
soft-thresholding, a log-spaced regularization path, k-fold cross-validation
over (degree, lambda), and the RMSE/RMSPE metrics.

The solver works on standardized columns and reports coefficients in the
original scale; the intercept column (column 0 of every design matrix) is
never penalized. A fit is only marked converged when a full coordinate pass
moves no coefficient by more than `tol` AND the KKT optimality conditions
hold within `kkt_tol` — the latter is what downstream checks rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels, featurize

KERNEL_BACKEND = _kernels.BACKEND

LAMBDA_MIN_RATIO = 1e-4

RNG_NAME = "numpy-pcg64"


class InsufficientDataError(ValueError):
    """Fewer samples than the requested cross-validation folds."""


@dataclass
class DesignMatrix:
    """Row-major (n, p) matrix whose column 0 is the all-ones intercept."""

    values: np.ndarray
    col_names: tuple[str, ...]

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ValueError(f"design matrix must be 2-D and non-empty, got {self.values.shape}")
        if len(self.col_names) != self.values.shape[1]:
            raise ValueError("column name count does not match matrix width")
        if not np.isfinite(self.values).all():
            raise ValueError("design matrix entries must be finite")
        if not np.all(self.values[:, 0] == 1.0):
            raise ValueError("column 0 must be the all-ones intercept column")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Scaler:
    """Per-column means/stds; constant columns are flagged and left alone."""

    means: tuple[float, ...]
    stds: tuple[float, ...]
    constant: tuple[bool, ...]


@dataclass
class LassoFit:
    coefficients: np.ndarray  # original scale; [0] is the intercept column's weight
    intercept: float
    lam: float
    iterations: int
    converged: bool


def _standardize_values(V: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Returns (standardized copy, means, stds, constant mask)."""
    const = V.max(axis=0) == V.min(axis=0)
    means = np.where(const, 0.0, V.mean(axis=0))
    stds = np.where(const, 1.0, V.std(axis=0))
    stds = np.where(stds == 0.0, 1.0, stds)
    return (V - means) / stds, means, stds, const


def standardize(X: DesignMatrix) -> tuple[DesignMatrix, Scaler]:
    """Center/scale every non-constant column to mean 0, population std 1."""
    Vs, means, stds, const = _standardize_values(X.values)
    scaler = Scaler(tuple(means.tolist()), tuple(stds.tolist()), tuple(bool(c) for c in const))
    return DesignMatrix(Vs, X.col_names), scaler


def _cd_solve(Xk: np.ndarray, yc: np.ndarray, colsq: np.ndarray, lam: float,
              tol: float, max_iter: int, kkt_tol: float,
              b0: np.ndarray | None = None) -> tuple[np.ndarray, int, bool]:
    """Coordinate descent on pre-standardized columns Xk against centered yc.

    Runs full cyclic passes interleaved with active-set refinement; declares
    convergence only when a full pass moves less than the effective tolerance
    and the KKT violation is within kkt_tol. The effective tolerance tightens
    if the sweep rule triggers before the KKT conditions hold.
    """
    n, m = Xk.shape
    if b0 is None:
        b = np.zeros(m, dtype=np.float64)
        r = yc.copy()
    else:
        b = np.array(b0, dtype=np.float64)
        r = yc - Xk @ b
    if m == 0:
        return b, 0, True
    all_cols = np.arange(m, dtype=np.intp)
    sweeps = 0
    tol_eff = tol
    converged = False
    while sweeps < max_iter:
        change = _kernels.sweep(Xk, r, b, colsq, lam, all_cols)
        sweeps += 1
        if change < tol_eff:
            if _kkt_violation_std(Xk, r, b, lam) <= kkt_tol:
                converged = True
                break
            tol_eff *= 1e-2
            continue
        active = np.flatnonzero(b).astype(np.intp)
        if active.size == 0:
            continue
        while sweeps < max_iter:
            change = _kernels.sweep(Xk, r, b, colsq, lam, active)
            sweeps += 1
            if change < tol_eff:
                break
    return b, sweeps, converged


def _kkt_violation_std(Xk: np.ndarray, r: np.ndarray, b: np.ndarray, lam: float) -> float:
    if Xk.shape[1] == 0:
        return 0.0
    g = (r @ Xk) / Xk.shape[0]
    zero = b == 0.0
    viol_zero = np.maximum(np.abs(g[zero]) - lam, 0.0)
    viol_active = np.abs(g[~zero] - lam * np.sign(b[~zero]))
    worst = 0.0
    if viol_zero.size:
        worst = max(worst, float(viol_zero.max()))
    if viol_active.size:
        worst = max(worst, float(viol_active.max()))
    return worst


def _prepare(V: np.ndarray):
    Vs, means, stds, const = _standardize_values(V)
    live = ~const
    Xk = np.asfortranarray(Vs[:, live])
    colsq = np.einsum("ij,ij->j", Xk, Xk) / Xk.shape[0]
    return Xk, colsq, means, stds, live


def _unscale(b: np.ndarray, means: np.ndarray, stds: np.ndarray, live: np.ndarray,
             ybar: float, p: int) -> tuple[np.ndarray, float]:
    beta = np.zeros(p, dtype=np.float64)
    beta[live] = b / stds[live]
    intercept = ybar - float(beta[live] @ means[live])
    beta[0] = intercept
    return beta, intercept


def fit_lasso(X: DesignMatrix, y: Sequence[float], lam: float, *,
              tol: float = 1e-7, max_iter: int = 10_000,
              kkt_tol: float = 1e-6) -> LassoFit:
    """Minimize (1/2n)||y - Xb||^2 + lam * ||b||_1 over non-intercept columns.

    The penalty applies to standardized coefficients; the returned
    coefficients are in the original column scale with the intercept at
    index 0. Non-convergence within max_iter coordinate passes is reported
    via converged=False, never as an exception.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.ndim != 1 or y.shape[0] != X.n:
        raise ValueError(f"y must be a length-{X.n} vector")
    if not np.isfinite(y).all():
        raise ValueError("y must be finite")
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be a finite non-negative real, got {lam}")
    Xk, colsq, means, stds, live = _prepare(X.values)
    ybar = float(y.mean())
    b, sweeps, converged = _cd_solve(Xk, y - ybar, colsq, lam, tol, max_iter, kkt_tol)
    beta, intercept = _unscale(b, means, stds, live, ybar, X.p)
    return LassoFit(coefficients=beta, intercept=intercept, lam=lam,
                    iterations=sweeps, converged=converged)


def kkt_violation(X: DesignMatrix, y: Sequence[float], fit: LassoFit) -> float:
    """Worst KKT violation of a fit, evaluated on the standardized columns."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    Xk, _, _, stds, live = _prepare(X.values)
    r = y - X.values @ fit.coefficients
    b = fit.coefficients[live] * stds[live]
    return _kkt_violation_std(Xk, r, b, fit.lam)


def lambda_max(X: DesignMatrix, y: Sequence[float]) -> float:
    """Smallest penalty at which every penalized coefficient is zero.

    Carries a one-part-in-1e12 safety factor so the all-zero property holds
    regardless of the summation order used by the active kernel backend.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    Xk, _, _, _, _ = _prepare(X.values)
    if Xk.shape[1] == 0:
        return 0.0
    g = ((y - y.mean()) @ Xk) / Xk.shape[0]
    return float(np.abs(g).max()) * (1.0 + 1e-12) if g.size else 0.0


def lambda_path(X: DesignMatrix, y: Sequence[float], count: int) -> list[float]:
    """Descending log-spaced grid from lambda_max down to lambda_max * 1e-4."""
    if count < 2:
        raise ValueError("lambda path needs at least 2 points")
    lmax = lambda_max(X, y)
    if lmax == 0.0:
        return [0.0]
    return [lmax * LAMBDA_MIN_RATIO ** (i / (count - 1)) for i in range(count)]


def rmse(pred: Sequence[float], actual: Sequence[float]) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape or pred.size == 0:
        raise ValueError("pred and actual must be non-empty and equally long")
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


def rmspe(pred: Sequence[float], actual: Sequence[float]) -> float:
    """Root-mean-square of relative errors, as a percentage."""
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape or pred.size == 0:
        raise ValueError("pred and actual must be non-empty and equally long")
    if np.any(actual == 0.0):
        raise ValueError("rmspe undefined for zero actual values")
    return float(np.sqrt(np.mean(((pred - actual) / actual) ** 2)) * 100.0)


@dataclass(frozen=True)
class TrainingData:
    """Raw features, special-term columns, and targets for one layer kind."""

    raw: np.ndarray        # (n, D)
    specials: np.ndarray   # (n, S)
    y: np.ndarray          # (n,)
    feature_names: tuple[str, ...] = ()
    special_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "raw", np.ascontiguousarray(self.raw, dtype=np.float64))
        object.__setattr__(self, "specials", np.ascontiguousarray(self.specials, dtype=np.float64))
        object.__setattr__(self, "y", np.ascontiguousarray(self.y, dtype=np.float64))
        n = self.y.shape[0]
        if self.raw.shape[0] != n or self.specials.shape[0] != n:
            raise ValueError("raw/specials/y row counts disagree")


def design_matrix(data: TrainingData, degree: int) -> DesignMatrix:
    """Monomial expansion of the raw features plus the special-term columns."""
    basis = featurize.build_basis(data.raw.shape[1], degree)
    mono = featurize.expand_rows(basis, data.raw)
    values = np.hstack([mono, data.specials])
    fnames = data.feature_names or tuple(f"x{i}" for i in range(data.raw.shape[1]))
    snames = data.special_names or tuple(f"s{i}" for i in range(data.specials.shape[1]))
    names = tuple(featurize.monomial_name(e, fnames) for e in basis.exponents) + tuple(snames)
    return DesignMatrix(values, names)


@dataclass(frozen=True)
class GridPoint:
    degree: int
    lam: float
    cv_rmse: float
    cv_rmspe: float


@dataclass(frozen=True)
class CvReport:
    grid: tuple[GridPoint, ...]
    best_degree: int
    best_lambda: float
    fold_seed: int
    rng: str = RNG_NAME


def fold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle split into `folds` near-equal validation folds."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < folds:
        raise InsufficientDataError(f"{n} samples cannot fill {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def cross_validate(data: TrainingData, degrees: Sequence[int], lambda_count: int = 30,
                   folds: int = 10, seed: int = 0, *,
                   tol: float = 1e-7, max_iter: int = 10_000,
                   kkt_tol: float = 1e-6) -> CvReport:
    """Pooled k-fold CV over every (degree, lambda) grid point.

    The lambda path for each degree comes from the full-data design matrix so
    all folds share a grid; per grid point the reported RMSE/RMSPE pools the
    held-out predictions of all folds. The winner minimizes cv_rmse with ties
    broken by smaller degree, then larger lambda.
    """
    y = data.y
    n = y.shape[0]
    splits = fold_indices(n, folds, seed)
    rmspe_ok = bool(np.all(y != 0.0))
    grid: list[GridPoint] = []
    for degree in degrees:
        X = design_matrix(data, degree)
        path = lambda_path(X, y, lambda_count)
        preds = np.empty((len(path), n), dtype=np.float64)
        for val_idx in splits:
            mask = np.ones(n, dtype=bool)
            mask[val_idx] = False
            V_tr = X.values[mask]
            y_tr = y[mask]
            Xk, colsq, means, stds, live = _prepare(V_tr)
            ybar = float(y_tr.mean())
            yc = y_tr - ybar
            b = None
            for li, lam in enumerate(path):
                b, _, _ = _cd_solve(Xk, yc, colsq, lam, tol, max_iter, kkt_tol, b0=b)
                beta, _ = _unscale(b, means, stds, live, ybar, X.p)
                preds[li, val_idx] = X.values[val_idx] @ beta
        for li, lam in enumerate(path):
            grid.append(GridPoint(
                degree=int(degree),
                lam=float(lam),
                cv_rmse=rmse(preds[li], y),
                cv_rmspe=rmspe(preds[li], y) if rmspe_ok else float("nan"),
            ))
    best = min(grid, key=lambda g: (g.cv_rmse, g.degree, -g.lam))
    return CvReport(grid=tuple(grid), best_degree=best.degree,
                    best_lambda=best.lam, fold_seed=seed)
