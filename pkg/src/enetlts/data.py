"""Datasets, standardization and back-transformation of coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import median_abs_deviation

from .exceptions import ZeroSpreadColumn

FAMILIES = ("gaussian", "binomial")

# spreads at or below this are treated as zero
_SPREAD_EPS = 1e-12


@dataclass
class Dataset:
    """Predictor matrix, response and family.

    ``X`` is stored as a Fortran-ordered float array since the coordinate
    descent kernels sweep over columns.
    """

    X: np.ndarray
    y: np.ndarray
    family: str = "gaussian"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        X = np.asfortranarray(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError("X must be two-dimensional")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("X and y must contain only finite values")
        if self.family == "binomial":
            if not np.all((y == 0) | (y == 1)):
                raise ValueError("binomial response must be coded 0/1")
            if y.min() == y.max():
                raise ValueError("binomial response must contain both classes")
        self.X, self.y = X, y

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def n0(self) -> int:
        return int(np.sum(self.y == 0))

    @property
    def n1(self) -> int:
        return int(np.sum(self.y == 1))

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.X[rows], self.y[rows], self.family)


@dataclass
class Standardizer:
    """Column centering/scaling plus response centering.

    ``mode`` is ``"robust_initial"`` (median/MAD) or ``"subset_moment"``
    (mean/sd over a subset of rows).
    """

    center: np.ndarray
    scale: np.ndarray
    y_center: float = 0.0
    mode: str = "robust_initial"

    @classmethod
    def identity(cls, p: int) -> "Standardizer":
        return cls(np.zeros(p), np.ones(p), 0.0, "identity")

    def transform_X(self, X):
        return np.asfortranarray((np.asarray(X, dtype=float) - self.center) / self.scale)

    def transform(self, data: Dataset) -> Dataset:
        y = data.y - self.y_center if data.family == "gaussian" else data.y
        return Dataset(self.transform_X(data.X), y, data.family)

    def inverse(self, data: Dataset) -> Dataset:
        X = data.X * self.scale + self.center
        y = data.y + self.y_center if data.family == "gaussian" else data.y
        return Dataset(X, y, data.family)

    def compose(self, inner: "Standardizer") -> "Standardizer":
        """Standardizer equal to applying ``self`` first and ``inner`` second."""
        return Standardizer(
            center=self.center + self.scale * inner.center,
            scale=self.scale * inner.scale,
            y_center=self.y_center + inner.y_center,
            mode=inner.mode,
        )


@dataclass
class SubsetFit:
    """An h-subset together with the penalized fit on it.

    Coefficients live on the scale of the (robustly standardized) data the
    search was run on.
    """

    indices: np.ndarray
    beta: np.ndarray
    intercept: float
    objective: float
    alpha: float
    lam: float
    n_csteps: int = 0

    @property
    def h(self) -> int:
        return len(self.indices)

    def scores(self, X) -> np.ndarray:
        return self.intercept + X @ self.beta

    def key(self) -> tuple:
        return tuple(int(i) for i in self.indices)


@dataclass
class ModelFit:
    """Final raw and reweighted enet-LTS estimates on the original scale."""

    family: str
    beta_raw: np.ndarray
    intercept_raw: float
    beta_rew: np.ndarray
    intercept_rew: float
    alpha_opt: float
    lambda_opt: float
    lambda_upd: float
    best_subset: np.ndarray
    weights: np.ndarray
    cv_surface: dict = field(default_factory=dict)
    h: int = 0
    reweighted: bool = True
    diagnostics: dict = field(default_factory=dict)

    def coefficients(self, which: str = "reweighted"):
        if which == "reweighted":
            return self.beta_rew, self.intercept_rew
        if which == "raw":
            return self.beta_raw, self.intercept_raw
        raise ValueError(f"which must be 'raw' or 'reweighted', got {which!r}")

    def decision_function(self, X, which: str = "reweighted") -> np.ndarray:
        beta, b0 = self.coefficients(which)
        return np.asarray(X, dtype=float) @ beta + b0

    def predict_proba(self, X, which: str = "reweighted") -> np.ndarray:
        if self.family != "binomial":
            raise ValueError("predict_proba is only defined for the binomial family")
        from .solver import sigmoid

        # keep probabilities strictly inside (0, 1)
        eps = np.finfo(float).eps
        return np.clip(sigmoid(self.decision_function(X, which)), eps, 1 - eps)

    def predict(self, X, which: str = "reweighted") -> np.ndarray:
        eta = self.decision_function(X, which)
        if self.family == "binomial":
            return (eta > 0).astype(float)
        return eta

    @property
    def outliers(self) -> np.ndarray:
        return np.flatnonzero(self.weights == 0)


def mad(x, axis=0):
    """Normal-consistent median absolute deviation."""
    return median_abs_deviation(x, axis=axis, scale="normal")


def robust_standardize(data: Dataset, names=None):
    """Center columns by the median and scale them by the MAD.

    A gaussian response is mean-centered; a binomial response is left as is.

    Returns
    -------
    (Dataset, Standardizer)

    Raises
    ------
    ZeroSpreadColumn
        If any column has zero MAD.
    """
    center = np.median(data.X, axis=0)
    scale = mad(data.X, axis=0)
    bad = np.flatnonzero(~(scale > _SPREAD_EPS))
    if bad.size:
        j = int(bad[0])
        raise ZeroSpreadColumn(j, None if names is None else names[j])
    y_center = float(np.mean(data.y)) if data.family == "gaussian" else 0.0
    s = Standardizer(center, scale, y_center, "robust_initial")
    return s.transform(data), s


def subset_standardize(data: Dataset, indices, on_zero: str = "raise"):
    """Standardize with means and standard deviations of the rows ``indices``.

    The transform is applied to all rows. Standard deviations use divisor
    ``m - 1``. With ``on_zero="freeze"`` a column that is constant within the
    subset keeps scale 1 instead of raising; it is then constant after
    centering and a solver will hold its coefficient at zero.
    """
    idx = np.asarray(indices, dtype=np.intp)
    if idx.size < 2:
        raise ValueError("subset_standardize needs at least two rows")
    Xs = data.X[idx]
    center = Xs.mean(axis=0)
    scale = Xs.std(axis=0, ddof=1)
    bad = ~(scale > _SPREAD_EPS * np.maximum(1.0, np.abs(center)))
    if np.any(bad):
        if on_zero == "raise":
            raise ZeroSpreadColumn(int(np.flatnonzero(bad)[0]))
        scale = np.where(bad, 1.0, scale)
    y_center = float(data.y[idx].mean()) if data.family == "gaussian" else 0.0
    s = Standardizer(center, scale, y_center, "subset_moment")
    return s.transform(data), s


def backtransform(beta_std, intercept_std, s: Standardizer):
    """Map coefficients fitted on standardized data back to the input scale."""
    beta = np.asarray(beta_std, dtype=float) / s.scale
    intercept = float(s.y_center + intercept_std - s.center @ beta)
    return beta, intercept
