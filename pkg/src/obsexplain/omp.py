"""
Greedy orthogonal matching pursuit over kernel translates.

The loop keeps the Newton basis N_1, ..., N_m evaluated at every sample
(matrix ``V``), the current residual and the squared power function.  At each
step the unselected sample with the largest absolute residual (f-greedy rule)
is added; its translate is orthogonalized against the basis so far, which is
one column of a pivoted Cholesky factorization of the Gram matrix.  The
upper-triangular matrix ``D`` expresses each N_j in kernel translates,

    N_j(x) = sum_{k <= j} D[k, j] K(x_{i_k}, x),

so the surrogate can be rewritten in the translate basis afterwards.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateDataError, InputError
from .kernels import KernelConfig, as_points, kernel_column

logger = logging.getLogger(__name__)

SELECTION_RULE = "f-greedy"

# candidates need P(x)^2 > POWER_FLOOR * K(x, x)
POWER_FLOOR = 1e-12


@dataclass(frozen=True)
class OmpConfig:
    tolerance: float = 0.0
    max_points: int | None = None
    tie_break: str = "lowest-index"

    def __post_init__(self):
        tol = float(self.tolerance)
        if not (tol >= 0 and math.isfinite(tol)):
            raise InputError(f"tolerance must be a nonnegative number, got {self.tolerance!r}")
        object.__setattr__(self, "tolerance", tol)
        if self.max_points is not None:
            if int(self.max_points) != self.max_points or self.max_points < 1:
                raise InputError(f"max_points must be a positive integer, got {self.max_points!r}")
            object.__setattr__(self, "max_points", int(self.max_points))
        if self.tie_break != "lowest-index":
            raise InputError(f"unsupported tie_break {self.tie_break!r}")


@dataclass(frozen=True)
class NewtonFactorization:
    """Result of :func:`fit`.

    Attributes
    ----------
    selected : (n*,) int array
        Sample indices in selection order.
    newton_at_samples : (n, n*) array
        ``V[k, j] = N_j(x_k)``.
    change_of_basis : (n*, n*) upper-triangular array
        ``D[k, j] = d_{k,j}``.
    newton_coeffs : (n*,) array
        Coefficients of the surrogate in the Newton basis.
    power_diag : (n,) array
        Final squared power function at every sample.
    residuals : (n,) array
        ``f(x_k) - f*(x_k)``.
    residual_history : (n* + 1,) array
        Max absolute residual before the first step and after each step.
    stop_reason : str
        ``"tolerance"``, ``"max_points"`` or ``"power_floor"``.
    """

    selected: np.ndarray
    newton_at_samples: np.ndarray
    change_of_basis: np.ndarray
    newton_coeffs: np.ndarray
    power_diag: np.ndarray
    residuals: np.ndarray
    f_vals: np.ndarray
    tolerance: float
    residual_history: np.ndarray = field(repr=False)
    stop_reason: str = "tolerance"

    @property
    def n(self) -> int:
        return self.residuals.shape[0]

    @property
    def n_selected(self) -> int:
        return self.selected.shape[0]


def _check_inputs(X, f_vals):
    X = as_points(X)
    f = np.asarray(f_vals, dtype=float).reshape(-1)
    if X.shape[0] == 0:
        raise InputError("need at least one sample point")
    if f.shape[0] != X.shape[0]:
        raise InputError(f"{X.shape[0]} points but {f.shape[0]} function values")
    if not np.all(np.isfinite(f)):
        raise InputError("function values contain NaN or Inf")
    return X, f


def fit(X, f_vals, kernel: KernelConfig, cfg: OmpConfig | None = None,
        trace=None) -> NewtonFactorization:
    """Run f-greedy OMP until ``max |residual| <= cfg.tolerance``.

    Parameters
    ----------
    X : (n, p) array_like
        Sample points.
    f_vals : (n,) array_like
        Black-box predictions at ``X``.
    kernel : KernelConfig
    cfg : OmpConfig, optional
        Defaults to ``OmpConfig()`` (interpolate to round-off).
    trace : callable, optional
        Called as ``trace(step, index, residuals, power_diag)`` after each
        step with copies of the state.  Used by tests to check per-step
        invariants.

    Raises
    ------
    InputError
        Empty input, shape mismatch or non-finite values.
    DegenerateDataError
        No sample has a usable power value at the first step.
    """
    cfg = cfg or OmpConfig()
    X, f = _check_inputs(X, f_vals)
    n = X.shape[0]
    cap = n if cfg.max_points is None else min(cfg.max_points, n)

    V = np.zeros((n, cap))
    D = np.zeros((cap, cap))
    coeffs = np.zeros(cap)
    selected = np.empty(cap, dtype=np.intp)
    available = np.ones(n, dtype=bool)
    r = f.copy()
    # every supported kernel has K(x, x) = 1
    power = np.ones(n)
    floor = POWER_FLOOR
    history = [float(np.max(np.abs(r)))]

    m = 0
    stop = "tolerance"
    while True:
        if history[-1] <= cfg.tolerance:
            stop = "tolerance"
            break
        if m == cap:
            stop = "max_points"
            break
        usable = available & (power > floor)
        if not usable.any():
            if m == 0:
                raise DegenerateDataError(
                    f"no sample has squared power function above the floor {floor:g}")
            warnings.warn(
                f"OMP stopped at {m} points: remaining candidates have squared power "
                f"function <= {floor:g}; achieved max residual {history[-1]:.3e} > "
                f"tolerance {cfg.tolerance:.3e}",
                RuntimeWarning, stacklevel=2)
            stop = "power_floor"
            break
        # np.argmax returns the first maximizer: lowest index wins ties
        score = np.where(usable, np.abs(r), -1.0)
        i = int(np.argmax(score))

        row = V[i, :m].copy()
        u = kernel_column(kernel, X, X[i]) - V[:, :m] @ row
        pivot = math.sqrt(power[i])
        newton = u / pivot
        newton[i] = pivot
        newton[selected[:m]] = 0.0
        V[:, m] = newton

        D[:m, m] = -(D[:m, :m] @ row) / pivot
        D[m, m] = 1.0 / pivot

        a = r[i] / pivot
        coeffs[m] = a
        r -= a * newton
        r[i] = 0.0
        power -= newton * newton
        power[i] = 0.0
        available[i] = False
        selected[m] = i
        m += 1
        history.append(float(np.max(np.abs(r))))
        if trace is not None:
            trace(m, i, r.copy(), power.copy())

    logger.debug("omp: n=%d n*=%d stop=%s max_res=%.3e", n, m, stop, history[-1])
    return NewtonFactorization(
        selected=selected[:m].copy(),
        newton_at_samples=V[:, :m].copy(),
        change_of_basis=D[:m, :m].copy(),
        newton_coeffs=coeffs[:m].copy(),
        power_diag=power,
        residuals=r,
        f_vals=f,
        tolerance=cfg.tolerance,
        residual_history=np.asarray(history),
        stop_reason=stop,
    )


def evaluate_newton(fact: NewtonFactorization, kernel: KernelConfig, X_sel, y) -> np.ndarray:
    """Values ``[N_1(y), ..., N_{n*}(y)]`` from the stored change of basis."""
    if fact.n_selected == 0:
        return np.zeros(0)
    X_sel = as_points(X_sel, "X_sel")
    if X_sel.shape[0] != fact.n_selected:
        raise InputError(f"expected {fact.n_selected} selected points, got {X_sel.shape[0]}")
    return kernel_column(kernel, X_sel, y) @ fact.change_of_basis


def max_residual(fact: NewtonFactorization) -> float:
    if fact.n == 0:
        return 0.0
    return float(np.max(np.abs(fact.residuals)))
