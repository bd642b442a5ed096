"""Observation-specific explanations from greedy kernel surrogates.

A black-box model is reconstructed on its sample points by orthogonal
matching pursuit over kernel translates.  The coefficients of the selected
translates give one importance score per observation.
"""

from .exceptions import DegenerateDataError, InputError
from .kernels import KernelConfig, KernelFamily, gram, kernel_column
from .omp import NewtonFactorization, OmpConfig, evaluate_newton, fit, max_residual
from .explain import (
    ExplanationReport,
    SurrogateModel,
    build_report,
    build_surrogate,
    explanations,
    kernel_coefficients,
    observation_errors,
    predict,
)
from .hyper import CvConfig, CvResult, cv_select, default_grid
from .data import Dataset, gen_ackley, gen_quadratic, load_csv, standardize, write_tables

__version__ = "0.1.0"

__all__ = [
    "CvConfig",
    "CvResult",
    "Dataset",
    "DegenerateDataError",
    "ExplanationReport",
    "InputError",
    "KernelConfig",
    "KernelFamily",
    "NewtonFactorization",
    "OmpConfig",
    "SurrogateModel",
    "build_report",
    "build_surrogate",
    "cv_select",
    "default_grid",
    "evaluate_newton",
    "explanations",
    "fit",
    "gen_ackley",
    "gen_quadratic",
    "gram",
    "kernel_column",
    "kernel_coefficients",
    "load_csv",
    "max_residual",
    "observation_errors",
    "predict",
    "standardize",
    "write_tables",
]
