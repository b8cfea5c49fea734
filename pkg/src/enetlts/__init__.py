"""Trimmed elastic-net (enet-LTS) linear and logistic regression."""

__version__ = "0.1.0"

from .data import Dataset, ModelFit, Standardizer, SubsetFit, robust_standardize
from .estimators import EnetFit, enet_cv, enet_lts
from .exceptions import (
    AllZeroWeights,
    DegenerateDraw,
    DegenerateSample,
    DegenerateWeights,
    EnetLTSError,
    FoldDegenerate,
    InfeasibleSplit,
    NoConvergence,
    ZeroSpreadColumn,
)
from .logistic import PhiControl, balanced_split, phi_by
from .simulation import SimScheme, preset, run_study
from .solver import PenaltySpec, SolverControl, fit_binomial, fit_gaussian
from .tuning import CVPlan, TuningGrid

__all__ = [
    "AllZeroWeights", "CVPlan", "Dataset", "DegenerateDraw", "DegenerateSample", "DegenerateWeights",
    "EnetFit", "EnetLTSError", "FoldDegenerate", "InfeasibleSplit", "ModelFit", "NoConvergence",
    "PenaltySpec", "PhiControl", "SimScheme", "SolverControl", "Standardizer", "SubsetFit", "TuningGrid",
    "ZeroSpreadColumn", "balanced_split", "enet_cv", "enet_lts", "fit_binomial", "fit_gaussian", "phi_by",
    "preset", "robust_standardize", "run_study",
]
