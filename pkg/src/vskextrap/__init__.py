"""Kernel-based extrapolation with variably scaled kernels.

The main entry points are :func:`fit` and :func:`evaluate` for polyharmonic
spline interpolation, :func:`select_scaling` and :func:`fit_vsk` for the
variably scaled variant, :func:`train_svr` for the SVR baseline and
:func:`run_experiment` for the benchmark harness.
"""
__version__ = "0.1.0"

from . import _core
from .errors import (
    ConfigError,
    DegenerateInputError,
    DomainError,
    ExperimentError,
    FitDegenerateError,
    PoleError,
    ScalingEvaluationError,
    SelectionError,
    ShapeError,
    SingularSystemError,
    VskError,
)
from .harness import ExperimentConfig, ExperimentResult, emit, read_csv, run_experiment, test_function
from .kernels import CUBIC, TPS, KernelSpec, cross_matrix, kernel_matrix, phs_eval
from .linsys import FittedExtrapolant, PolyBasis, assemble, evaluate, fit, solve
from .nodes import Distribution, NodeSet, chebyshev, equispaced, generate, halton, random_uniform
from .scaling_fit import ModelClass, ScalingModel, fit_class, select_scaling
from .svr import PolynomialKernel, SvrModel, cross_validate, predict_svr, train_svr
from .vsk import ScalingFunction, evaluate_vsk, fit_vsk, lift

BACKEND = _core.BACKEND
