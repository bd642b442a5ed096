"""
Normalized radial kernels.

All three families satisfy K(x, x) = 1 and depend on x, y only through the
Euclidean distance r = ||x - y||:

    gaussian      exp(-r^2 / (2 l^2))
    matern32      (1 + sqrt(3) r / l) exp(-sqrt(3) r / l)
    exponential   exp(-r / l)

The Gaussian uses the GP convention; the form exp(-r^2 / l^2) is recovered by
passing l / sqrt(2).  Distances are computed by per-coordinate subtraction,
never through the ||x||^2 + ||y||^2 - 2<x, y> expansion, so small radii keep
full relative accuracy and K(x, y) == K(y, x) bitwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError

_SQRT3 = math.sqrt(3.0)

# rows per block in gram(); bounds the (rows, n, p) difference tensor
_GRAM_BLOCK = 256


class KernelFamily(str, enum.Enum):
    GAUSSIAN = "gaussian"
    MATERN32 = "matern32"
    EXPONENTIAL = "exponential"

    @classmethod
    def parse(cls, name: "str | KernelFamily") -> "KernelFamily":
        if isinstance(name, KernelFamily):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        aliases = {"matern": "matern32", "matern3/2": "matern32", "rbf": "gaussian"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(f.value for f in cls)
            raise InputError(f"unknown kernel family {name!r}; expected one of {valid}") from None


@dataclass(frozen=True)
class KernelConfig:
    """Kernel family plus isotropic length scale."""

    family: KernelFamily
    length_scale: float

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily.parse(self.family))
        ls = float(self.length_scale)
        if not (math.isfinite(ls) and ls > 0):
            raise InputError(f"length_scale must be positive and finite, got {self.length_scale!r}")
        object.__setattr__(self, "length_scale", ls)

    def profile(self, r):
        """Radial profile phi(r) so that K(x, y) = phi(||x - y||)."""
        r = np.asarray(r, dtype=float)
        s = r / self.length_scale
        if self.family is KernelFamily.GAUSSIAN:
            return np.exp(-0.5 * s * s)
        if self.family is KernelFamily.MATERN32:
            t = _SQRT3 * s
            return (1.0 + t) * np.exp(-t)
        return np.exp(-s)

    def __call__(self, x, y) -> float:
        return eval_kernel(self, x, y)


def _as_point(x, name="point") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} has non-finite coordinates")
    return x


def as_points(X, name="X") -> np.ndarray:
    """Coerce to an (n, p) float array of finite coordinates."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"{name} must be a 2-d array of points, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} has non-finite coordinates")
    return X


def eval_kernel(cfg: KernelConfig, x, y) -> float:
    x = _as_point(x, "x")
    y = _as_point(y, "y")
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    # same reduction path as kernel_column, so both agree bitwise
    return float(kernel_column(cfg, x[None, :], y)[0])


def kernel_column(cfg: KernelConfig, X, y) -> np.ndarray:
    """Vector of K(x_i, y) over the rows x_i of X."""
    X = as_points(X)
    y = _as_point(y, "y")
    if X.shape[1] != y.shape[0]:
        raise InputError(f"dimension mismatch: points have p={X.shape[1]}, y has {y.shape[0]}")
    d = X - y
    return cfg.profile(np.sqrt(np.einsum("ij,ij->i", d, d)))


def cross_kernel(cfg: KernelConfig, X, Y) -> np.ndarray:
    """Matrix K(x_i, y_j) for rows of X and Y."""
    X = as_points(X)
    Y = as_points(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    out = np.empty((X.shape[0], Y.shape[0]))
    for start in range(0, X.shape[0], _GRAM_BLOCK):
        stop = min(start + _GRAM_BLOCK, X.shape[0])
        d = X[start:stop, None, :] - Y[None, :, :]
        out[start:stop] = cfg.profile(np.sqrt(np.einsum("ijk,ijk->ij", d, d)))
    return out


def gram(cfg: KernelConfig, X) -> np.ndarray:
    """Symmetric Gram matrix with unit diagonal."""
    X = as_points(X)
    if X.shape[0] < 1:
        raise InputError("gram needs at least one point")
    return cross_kernel(cfg, X, X)
