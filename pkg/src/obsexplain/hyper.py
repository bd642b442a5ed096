"""K-fold cross-validation of the kernel length scale."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateDataError, InputError
from .kernels import KernelConfig, KernelFamily, as_points, cross_kernel
from .omp import OmpConfig, fit

logger = logging.getLogger(__name__)


def default_grid() -> np.ndarray:
    """25 log-spaced length scales on [1e-4, 1e2]."""
    return np.logspace(-4, 2, 25)


@dataclass(frozen=True)
class CvConfig:
    k_folds: int = 5
    grid: tuple = field(default_factory=lambda: tuple(default_grid()))
    shuffle_seed: int = 42
    n_jobs: int = 1

    def __post_init__(self):
        if int(self.k_folds) != self.k_folds or self.k_folds < 2:
            raise InputError(f"k_folds must be an integer >= 2, got {self.k_folds!r}")
        grid = tuple(float(g) for g in np.atleast_1d(np.asarray(self.grid, dtype=float)))
        if not grid:
            raise InputError("length-scale grid is empty")
        if not all(math.isfinite(g) and g > 0 for g in grid):
            raise InputError("length-scale grid must hold positive finite values")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "k_folds", int(self.k_folds))


@dataclass(frozen=True)
class CvResult:
    best_length_scale: float
    grid: np.ndarray
    cv_errors: np.ndarray
    fold_errors: np.ndarray
    folds: list

    @property
    def best_error(self) -> float:
        return float(self.cv_errors[int(np.flatnonzero(self.grid == self.best_length_scale)[0])])

    def __iter__(self):
        # (best, curve) unpacking
        yield self.best_length_scale
        yield self.cv_errors


def make_folds(n: int, k_folds: int, seed: int) -> list[np.ndarray]:
    """Seeded permutation of ``range(n)`` cut into ``k_folds`` contiguous
    pieces whose sizes differ by at most one."""
    if k_folds > n:
        raise InputError(f"k_folds={k_folds} exceeds the number of samples n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, k_folds)]


def _fold_mse(X, f, folds, kernel, omp_cfg) -> np.ndarray:
    out = np.empty(len(folds))
    n = X.shape[0]
    for j, test in enumerate(folds):
        train = np.setdiff1d(np.arange(n), test, assume_unique=True)
        if train.size < 1:
            raise InputError(f"fold {j} leaves no training points")
        fact = fit(X[train], f[train], kernel, omp_cfg)
        if fact.n_selected:
            S = train[fact.selected]
            c = fact.change_of_basis @ fact.newton_coeffs
            pred = cross_kernel(kernel, X[test], X[S]) @ c
        else:
            pred = np.zeros(test.size)
        out[j] = np.mean((f[test] - pred) ** 2)
    return out


def _score(X, f, folds, family, ls, omp_cfg):
    kernel = KernelConfig(family, ls)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return _fold_mse(X, f, folds, kernel, omp_cfg)
    except DegenerateDataError as exc:
        logger.warning("length scale %g: %s", ls, exc)
        return np.full(len(folds), np.nan)


def cv_select(X, f_vals, family, cfg: CvConfig | None = None,
              omp_cfg: OmpConfig | None = None) -> CvResult:
    """Grid search over length scales by K-fold held-out MSE of the surrogate.

    The returned length scale minimizes the mean fold MSE; ties go to the
    smallest length scale.  Candidates whose error is not finite are skipped
    with a warning and never chosen.
    """
    cfg = cfg or CvConfig()
    omp_cfg = omp_cfg or OmpConfig()
    family = KernelFamily.parse(family)
    X = as_points(X)
    f = np.asarray(f_vals, dtype=float).reshape(-1)
    if f.shape[0] != X.shape[0]:
        raise InputError(f"{X.shape[0]} points but {f.shape[0]} values")
    if not np.all(np.isfinite(f)):
        raise InputError("function values contain NaN or Inf")
    n = X.shape[0]
    folds = make_folds(n, cfg.k_folds, cfg.shuffle_seed)
    if n - max(len(t) for t in folds) < 1:
        raise InputError("a fold leaves no training points")
    grid = np.asarray(cfg.grid)

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            rows = list(pool.map(lambda ls: _score(X, f, folds, family, ls, omp_cfg), grid))
    else:
        rows = [_score(X, f, folds, family, ls, omp_cfg) for ls in grid]
    fold_errors = np.vstack(rows)
    cv_errors = fold_errors.mean(axis=1)

    finite = np.isfinite(cv_errors)
    for ls in grid[~finite]:
        warnings.warn(f"cross-validation error is not finite for length scale {ls:g}; skipped",
                      RuntimeWarning, stacklevel=2)
    if not finite.any():
        raise DegenerateDataError("no length scale in the grid produced a finite CV error")
    best_err = cv_errors[finite].min()
    best = float(grid[finite & (cv_errors == best_err)].min())
    return CvResult(best, grid, cv_errors, fold_errors, folds)
