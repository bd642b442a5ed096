"""
From a Newton factorization to per-observation importance scores.

The surrogate has two equivalent forms,

    f*(x) = sum_j a_j N_j(x) = sum_k c_{i_k} K(x_{i_k}, x),

with ``c_S = D @ a``.  Each translate coefficient belongs to exactly one
sample, so ``gamma_i = |c_i| / max |c|`` ranks the observations; samples that
were never selected get ``c_i = 0`` and therefore ``gamma_i = 0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError
from .kernels import KernelConfig, as_points, cross_kernel
from .omp import SELECTION_RULE, NewtonFactorization, OmpConfig, fit, max_residual

# relative agreement required between the translate and Newton forms
REPRESENTATION_RTOL = 1e-8


def kernel_coefficients(fact: NewtonFactorization) -> np.ndarray:
    """Length-n translate coefficients; zero off the selected set."""
    c = np.zeros(fact.n)
    if fact.n_selected:
        # c_{i_k} = sum_{j >= k} D[k, j] a_j; D is upper triangular
        c[fact.selected] = fact.change_of_basis @ fact.newton_coeffs
    return c


def explanations(c) -> np.ndarray:
    """Normalize ``|c|`` by its maximum.

    An all-zero ``c`` (the black box is identically zero on the sample) has no
    meaningful normalization; the result is all zeros and a ``RuntimeWarning``
    is emitted.  :class:`ExplanationReport` records the same condition in its
    ``degenerate`` field.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size and np.all(np.isnan(c)):
        raise InputError("coefficient vector is all NaN")
    mag = np.abs(c)
    top = mag.max() if mag.size else 0.0
    if top == 0:
        warnings.warn("all translate coefficients are zero; explanations set to 0",
                      RuntimeWarning, stacklevel=2)
        return np.zeros_like(mag)
    gamma = mag / top
    gamma[mag == top] = 1.0
    return gamma


@dataclass(frozen=True)
class SurrogateModel:
    kernel: KernelConfig
    selected_points: np.ndarray
    selected_indices: np.ndarray
    kernel_coeffs: np.ndarray
    newton: NewtonFactorization = field(repr=False)

    @property
    def dim(self) -> int:
        return self.selected_points.shape[1]

    def predict(self, Y, check: bool = False) -> np.ndarray:
        """Evaluate f* at the rows of ``Y`` (translate form)."""
        Y = as_points(Y, "Y")
        if self.selected_indices.size == 0:
            return np.zeros(Y.shape[0])
        if Y.shape[1] != self.dim:
            raise InputError(f"dimension mismatch: model has p={self.dim}, got {Y.shape[1]}")
        K = cross_kernel(self.kernel, Y, self.selected_points)
        out = K @ self.kernel_coeffs[self.selected_indices]
        if check:
            alt = (K @ self.newton.change_of_basis) @ self.newton.newton_coeffs
            _check_representations(out, alt)
        return out

    def predict_newton(self, Y) -> np.ndarray:
        """Evaluate f* at the rows of ``Y`` through the Newton basis."""
        Y = as_points(Y, "Y")
        if self.selected_indices.size == 0:
            return np.zeros(Y.shape[0])
        if Y.shape[1] != self.dim:
            raise InputError(f"dimension mismatch: model has p={self.dim}, got {Y.shape[1]}")
        K = cross_kernel(self.kernel, Y, self.selected_points)
        return (K @ self.newton.change_of_basis) @ self.newton.newton_coeffs


def representation_gap(translate, newton) -> float:
    """Largest ``|a - b| / (1 + |a|)`` between the two surrogate forms."""
    if translate.size == 0:
        return 0.0
    return float(np.max(np.abs(translate - newton) / (1.0 + np.abs(translate))))


def _check_representations(translate, newton):
    gap = np.abs(translate - newton)
    bound = REPRESENTATION_RTOL * (1.0 + np.abs(translate))
    if np.any(gap > bound):
        k = int(np.argmax(gap - bound))
        raise AssertionError(
            f"translate and Newton forms of the surrogate disagree at point {k}: "
            f"{translate[k]!r} vs {newton[k]!r}")


def build_surrogate(X, fact: NewtonFactorization, kernel: KernelConfig) -> SurrogateModel:
    X = as_points(X)
    if X.shape[0] != fact.n:
        raise InputError(f"factorization has n={fact.n}, got {X.shape[0]} points")
    return SurrogateModel(
        kernel=kernel,
        selected_points=X[fact.selected].copy(),
        selected_indices=fact.selected.copy(),
        kernel_coeffs=kernel_coefficients(fact),
        newton=fact,
    )


def predict(model: SurrogateModel, y) -> float:
    """f* at a single point."""
    y = np.asarray(y, dtype=float).reshape(-1)
    return float(model.predict(y[None, :])[0])


def observation_errors(model: SurrogateModel, X, f_vals):
    """Absolute errors ``|f(x_i) - f*(x_i)|`` and the normalized variant
    ``err_i / (1 + |f(x_i)|)``."""
    X = as_points(X)
    f = np.asarray(f_vals, dtype=float).reshape(-1)
    if f.shape[0] != X.shape[0]:
        raise InputError(f"{X.shape[0]} points but {f.shape[0]} values")
    err = np.abs(f - model.predict(X))
    return err, err / (1.0 + np.abs(f))


@dataclass(frozen=True)
class ExplanationReport:
    gamma: np.ndarray
    errors: np.ndarray
    normalized_errors: np.ndarray
    predictions: np.ndarray
    selected_indices: np.ndarray
    achieved_tolerance: float
    n_selected: int
    kernel_family: str
    length_scale: float
    epsilon: float
    selection_rule: str = SELECTION_RULE
    stop_reason: str = "tolerance"
    degenerate: bool = False
    representation_gap: float = 0.0

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    @property
    def selected_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.selected_indices] = True
        return mask

    def top(self, k: int = 10) -> np.ndarray:
        """Indices of the ``k`` largest explanations (stable order on ties)."""
        order = np.argsort(-self.gamma, kind="stable")
        return order[: min(k, self.n_selected)]

    def metadata(self) -> dict:
        return {
            "kernel": self.kernel_family,
            "length_scale": self.length_scale,
            "epsilon": self.epsilon,
            "selection_rule": self.selection_rule,
            "stop_reason": self.stop_reason,
            "n": self.n,
            "n_selected": self.n_selected,
            "achieved_max_residual": self.achieved_tolerance,
            "degenerate": self.degenerate,
            "representation_gap": self.representation_gap,
        }


def build_report(X, f_vals, kernel: KernelConfig, cfg: OmpConfig | None = None,
                 check: bool = True) -> tuple[SurrogateModel, ExplanationReport]:
    """Fit the surrogate and derive explanations and errors in one go.

    With ``check`` (the default) the translate form is cross-checked against
    the Newton form at every sample and the nonzero pattern of ``gamma`` is
    checked against the selected set.  A support mismatch raises
    ``AssertionError``.  A representation gap above ``REPRESENTATION_RTOL``
    only warns: it also arises, without any bug, when the selected Gram block
    is badly conditioned.  The gap is stored on the report either way.
    """
    cfg = cfg or OmpConfig()
    X = as_points(X)
    fact = fit(X, f_vals, kernel, cfg)
    model = build_surrogate(X, fact, kernel)
    f = fact.f_vals
    preds = model.predict(X)
    gap = representation_gap(preds, fact.newton_at_samples @ fact.newton_coeffs)
    if check and gap > REPRESENTATION_RTOL:
        warnings.warn(
            f"translate and Newton forms differ by {gap:.2e} (relative) at the samples; "
            "the selected Gram block is likely ill-conditioned", RuntimeWarning, stacklevel=2)
    err = np.abs(f - preds)
    c = model.kernel_coeffs
    degenerate = not np.any(c)
    if degenerate:
        gamma = np.zeros(fact.n)
    else:
        gamma = explanations(c)
    if check and not degenerate:
        support = np.flatnonzero(gamma > 0)
        if not np.array_equal(np.sort(support), np.sort(fact.selected)):
            raise AssertionError("explanation support differs from the selected set")
    report = ExplanationReport(
        gamma=gamma,
        errors=err,
        normalized_errors=err / (1.0 + np.abs(f)),
        predictions=preds,
        selected_indices=fact.selected.copy(),
        achieved_tolerance=max_residual(fact),
        n_selected=fact.n_selected,
        kernel_family=kernel.family.value,
        length_scale=kernel.length_scale,
        epsilon=cfg.tolerance,
        stop_reason=fact.stop_reason,
        degenerate=degenerate,
        representation_gap=gap,
    )
    return model, report
