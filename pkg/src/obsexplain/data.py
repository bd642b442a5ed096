"""Datasets: CSV ingestion, standardization, synthetic scenarios, plot tables."""

from __future__ import annotations

import csv
import logging
import math
import os
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import InputError

logger = logging.getLogger(__name__)

TABLE_FORMAT = "%.9g"

# a column is numeric when at least this share of its non-empty cells parse
_NUMERIC_SHARE = 0.5


@dataclass(frozen=True)
class Dataset:
    """Sample points and the black-box predictions at them.

    ``standardization`` holds one ``(mean, std)`` pair per feature column when
    ``points`` are standardized; :meth:`original_points` undoes it.
    """

    points: np.ndarray
    targets: np.ndarray
    column_names: tuple
    target_name: str = "f"
    standardization: tuple | None = None
    dropped_rows: int = 0
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        X = np.asarray(self.points, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.targets, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise InputError(f"dataset needs n >= 1 rows and p >= 1 columns, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise InputError(f"{X.shape[0]} points but {y.shape[0]} targets")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InputError("dataset contains NaN or Inf")
        if len(self.column_names) != X.shape[1]:
            raise InputError(f"{X.shape[1]} columns but {len(self.column_names)} names")
        object.__setattr__(self, "points", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]

    def original_points(self) -> np.ndarray:
        if self.standardization is None:
            return self.points
        mean = np.array([m for m, _ in self.standardization])
        std = np.array([s for _, s in self.standardization])
        return self.points * std + mean


def _parse_float(cell: str):
    cell = cell.strip()
    if not cell or cell.upper() in {"NA", "NAN", "NULL", "NONE", "?"}:
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, target_column: str, features=None, exclude=()) -> Dataset:
    """Read a comma-separated file with a header row.

    Numeric columns other than ``target_column`` (and anything in
    ``exclude``) become features, unless ``features`` names them explicitly.
    Non-numeric columns are dropped with a warning.  Rows with a missing or
    unparseable value in a used column are dropped and counted; more than
    half the rows dropped is an error.
    """
    path = os.fspath(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if target_column not in header:
        raise InputError(f"{path}: target column {target_column!r} not found; "
                         f"columns are {', '.join(header)}")
    width = len(header)
    body = [r + [""] * (width - len(r)) if len(r) < width else r[:width] for r in body]
    if not body:
        raise InputError(f"{path}: no data rows")

    parsed = [[_parse_float(c) for c in r] for r in body]
    exclude = set(exclude)
    if features is not None:
        features = list(features)
        missing = [c for c in features if c not in header]
        if missing:
            raise InputError(f"{path}: feature columns not found: {', '.join(missing)}")
        if target_column in features:
            raise InputError("the target column cannot also be a feature")
    else:
        features = []
        for j, name in enumerate(header):
            if name == target_column or name in exclude:
                continue
            cells = [r[j] for r in body if r[j].strip()]
            good = sum(parsed[i][j] is not None for i, r in enumerate(body) if r[j].strip())
            if cells and good / len(cells) >= _NUMERIC_SHARE:
                features.append(name)
            else:
                warnings.warn(f"{path}: dropping non-numeric column {name!r}", stacklevel=2)
    if not features:
        raise InputError(f"{path}: no numeric feature columns")

    t = header.index(target_column)
    target_cells = [r[t] for r in body if r[t].strip()]
    if not target_cells or sum(_parse_float(c) is not None for c in target_cells) / len(target_cells) < _NUMERIC_SHARE:
        raise InputError(f"{path}: target column {target_column!r} is not numeric")

    cols = [header.index(c) for c in features]
    X, y = [], []
    for vals in parsed:
        row = [vals[j] for j in cols]
        if vals[t] is None or any(v is None for v in row):
            continue
        X.append(row)
        y.append(vals[t])
    dropped = len(parsed) - len(X)
    if not X:
        raise InputError(f"{path}: zero usable rows")
    if dropped > 0.5 * len(parsed):
        raise InputError(f"{path}: {dropped} of {len(parsed)} rows unusable (more than half)")
    if dropped:
        logger.warning("%s: dropped %d rows with missing or non-numeric values", path, dropped)
    return Dataset(np.array(X), np.array(y), tuple(features), target_name=target_column,
                   dropped_rows=dropped, source=path)


def standardize(ds: Dataset) -> Dataset:
    """Zero mean, unit population standard deviation per feature column.

    Applied to an already standardized dataset the transform composes, so
    ``original_points`` still maps back to the raw units.
    """
    X = ds.points
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    for name, s, col in zip(ds.column_names, std, X.T):
        if s == 0 or np.ptp(col) == 0:
            raise InputError(f"column {name!r} is constant and cannot be standardized")
    Z = (X - mean) / std
    if ds.standardization is not None:
        prev_m = np.array([m for m, _ in ds.standardization])
        prev_s = np.array([s for _, s in ds.standardization])
        mean, std = prev_m + prev_s * mean, prev_s * std
    record = tuple((float(m), float(s)) for m, s in zip(mean, std))
    return replace(ds, points=Z, standardization=record)


def _gaussian_points(n: int, seed: int) -> np.ndarray:
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    return np.random.default_rng(seed).standard_normal((int(n), 2))


def quadratic(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return X[:, 0] ** 2 + X[:, 1] ** 2 + 1.0


def ackley(X, a: float = 20.0, b: float = 0.2, c: float = 2 * math.pi) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    x1, x2 = X[:, 0], X[:, 1]
    return (-a * np.exp(-b * np.sqrt(0.5 * (x1 ** 2 + x2 ** 2)))
            - np.exp(0.5 * (np.cos(c * x1) + np.cos(c * x2))) + a + math.e)


def gen_quadratic(n: int, seed: int = 42) -> Dataset:
    """n standard-Gaussian points in the plane with target x1^2 + x2^2 + 1."""
    X = _gaussian_points(n, seed)
    return Dataset(X, quadratic(X), ("X1", "X2"), target_name="quadratic", source="quadratic")


def gen_ackley(n: int, seed: int = 42) -> Dataset:
    """n standard-Gaussian points in the plane with the 2-d Ackley target."""
    X = _gaussian_points(n, seed)
    return Dataset(X, ackley(X), ("X1", "X2"), target_name="ackley", source="ackley")


SCENARIOS = {"quadratic": gen_quadratic, "ackley": gen_ackley}


def _write_table(path, header, data):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(" ".join(header) + "\n")
        for row in data:
            fh.write(" ".join(TABLE_FORMAT % v for v in row) + "\n")


def write_tables(report, ds: Dataset, out_dir, name: str = "data") -> tuple[str, str]:
    """Write ``<name>_full.txt`` (every row, with absolute error) and
    ``<name>_expl.txt`` (selected rows, with explanation) to ``out_dir``.

    Features are written in their original units.
    """
    if report.n != ds.n:
        raise InputError(f"report has n={report.n}, dataset has n={ds.n}")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out_dir}: {exc}") from exc
    X = ds.original_points()
    xcols = [f"X{j + 1}" for j in range(ds.p)]
    full = os.path.join(out_dir, f"{name}_full.txt")
    expl = os.path.join(out_dir, f"{name}_expl.txt")
    sel = np.sort(report.selected_indices)
    try:
        _write_table(full, xcols + ["Y_pred", "Abs_err"],
                     np.column_stack([X, ds.targets, report.errors]))
        _write_table(expl, xcols + ["Y_pred", "Gamma"],
                     np.column_stack([X[sel], ds.targets[sel], report.gamma[sel]]))
    except OSError as exc:
        raise InputError(f"cannot write tables to {out_dir}: {exc}") from exc
    return full, expl


def read_table(path):
    """Read a table written by :func:`write_tables`: ``(column names, data)``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
    data = np.loadtxt(path, skiprows=1, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, data
