"""Tuning grids, lambda_0 rules and repeated k-fold cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._search import SearchControl, fit_rows
from .data import Dataset, mad
from .exceptions import FoldDegenerate, ZeroSpreadColumn
from .solver import PenaltySpec, deviance, null_lambda

DEFAULT_ALPHAS = np.linspace(0.0, 1.0, 41)
DEFAULT_LAMBDA_FRACS = np.round(0.025 * np.arange(40, 0, -1), 10)
WINSOR_CONST = 2.0
MAX_FOLD_DRAWS = 100
# lambda0 sits this far above the exact null-model bound to absorb rounding
_NULL_MARGIN = 1.0 + 1e-9


@dataclass
class TuningGrid:
    """Alphas in ``[0, 1]`` and lambda values as multiples of ``lambda0``."""

    lambda0: float
    alphas: np.ndarray = field(default_factory=lambda: DEFAULT_ALPHAS.copy())
    lambda_fracs: np.ndarray = field(default_factory=lambda: DEFAULT_LAMBDA_FRACS.copy())

    def __post_init__(self):
        self.alphas = np.unique(np.asarray(self.alphas, dtype=float))
        self.lambda_fracs = np.unique(np.asarray(self.lambda_fracs, dtype=float))[::-1]
        if self.alphas.size == 0 or self.alphas[0] < 0 or self.alphas[-1] > 1:
            raise ValueError("alphas must be a nonempty subset of [0, 1]")
        if self.lambda_fracs.size == 0 or self.lambda_fracs[-1] <= 0:
            raise ValueError("lambda multipliers must be positive")
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")

    @property
    def lambdas(self) -> np.ndarray:
        return self.lambda0 * self.lambda_fracs

    def cells(self):
        """Grid cells in traversal order: alpha ascending, lambda descending."""
        return [(float(a), float(l)) for a in self.alphas for l in self.lambdas]


@dataclass
class CVPlan:
    k: int = 5
    repeats: int = 5
    seed: int = 0
    stratified: Optional[bool] = None

    def __post_init__(self):
        if self.k < 2 or self.repeats < 1:
            raise ValueError("CV needs k >= 2 and repeats >= 1")

    def is_stratified(self, family: str) -> bool:
        return family == "binomial" if self.stratified is None else bool(self.stratified)


def winsorize(data: Dataset, c: float = WINSOR_CONST) -> Dataset:
    """Clip every column (and a gaussian response) at ``median +- c * MAD``.

    Values stay in the original units.
    """
    center = np.median(data.X, axis=0)
    scale = mad(data.X, axis=0)
    bad = np.flatnonzero(~(scale > 0))
    if bad.size:
        raise ZeroSpreadColumn(int(bad[0]))
    X = center + scale * np.clip((data.X - center) / scale, -c, c)
    y = data.y
    if data.family == "gaussian":
        my, sy = np.median(y), mad(y)
        if sy > 0:
            y = my + sy * np.clip((y - my) / sy, -c, c)
    return Dataset(X, y, data.family)


def winsorized_correlations(data: Dataset, c: float = WINSOR_CONST) -> np.ndarray:
    """Pearson correlations between each winsorized predictor and winsorized y."""
    w = winsorize(data, c)
    Xc = w.X - w.X.mean(axis=0)
    yc = w.y - w.y.mean()
    denom = np.sqrt((Xc**2).sum(axis=0) * (yc @ yc))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (Xc.T @ yc) / denom
    return np.where(denom > 0, r, 0.0)


def lambda0_linear(data: Dataset) -> float:
    """Largest lambda of the grid for the gaussian family.

    The largest absolute winsorized correlation, rescaled by the winsorized
    standard deviations. This equals the null-model bound of the lasso on the
    winsorized data, so the fit at ``(alpha=1, lambda0)`` there is all zero.
    """
    w = winsorize(data)
    r = winsorized_correlations(data)
    sd = w.X.std(axis=0) * w.y.std()
    return float(np.max(np.abs(r) * sd)) * _NULL_MARGIN


def point_biserial(data: Dataset) -> np.ndarray:
    """Robust point-biserial correlation of every predictor with the labels."""
    y = data.y
    n0, n1, n = data.n0, data.n1, data.n
    m0 = np.median(data.X[y == 0], axis=0)
    m1 = np.median(data.X[y == 1], axis=0)
    s = mad(data.X, axis=0)
    bad = np.flatnonzero(~(s > 0))
    if bad.size:
        raise ZeroSpreadColumn(int(bad[0]))
    return (m1 - m0) / s * np.sqrt(n0 * n1 / (n * (n - 1)))


def lambda0_logistic(data: Dataset) -> float:
    """Largest lambda of the grid for the binomial family.

    The point-biserial correlations are mapped to the gradient scale of the
    mean deviance at the null model, ``n0 n1 / n^2 * |m1 - m0|``; the result
    is raised, if needed, to the null-model bound on the winsorized data.
    """
    n0, n1, n = data.n0, data.n1, data.n
    rpb = point_biserial(data)
    robust = np.max(np.abs(rpb) * mad(data.X, axis=0)) * np.sqrt(n0 * n1 * (n - 1) / n**3)
    w = winsorize(data)
    return float(max(robust, null_lambda("binomial", w.X, w.y))) * _NULL_MARGIN


def lambda0(data: Dataset) -> float:
    return lambda0_linear(data) if data.family == "gaussian" else lambda0_logistic(data)


def fold_ids(y, k: int, rng, stratified: bool) -> np.ndarray:
    """Random fold labels ``0..k-1`` of (almost) equal size.

    Stratified assignment deals each class out round robin, so every fold
    gets about the same class proportions.
    """
    y = np.asarray(y)
    m = len(y)
    folds = np.empty(m, dtype=np.intp)
    if not stratified:
        folds[rng.permutation(m)] = np.arange(m) % k
        return folds
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        folds[rng.permutation(idx)] = (offset + np.arange(len(idx))) % k
        offset += len(idx)
    return folds


def _cv_rng(seed: int, *key):
    return np.random.default_rng([seed, *key])


def cv_rows(
    data: Dataset,
    rows,
    spec: PenaltySpec,
    plan: CVPlan,
    key=(),
    warm=None,
    warm_intercept=None,
    ctrl: Optional[SearchControl] = None,
) -> float:
    """Repeated k-fold CV of the penalized model restricted to ``rows``.

    Returns the average over repeats of the pooled RMSPE (gaussian) or
    mean deviance (binomial) of the held-out rows.
    """
    rows = np.asarray(rows, dtype=np.intp)
    ctrl = ctrl or SearchControl(h=len(rows))
    y = data.y[rows]
    binomial = data.family == "binomial"
    strat = plan.is_stratified(data.family)
    values = []
    for rep in range(plan.repeats):
        rng = _cv_rng(plan.seed, *key, rep)
        for _ in range(MAX_FOLD_DRAWS):
            folds = fold_ids(y, plan.k, rng, strat)
            if not binomial or all(np.unique(y[folds != f]).size == 2 for f in range(plan.k)):
                break
        else:
            raise FoldDegenerate("could not draw folds keeping both classes in every training set")
        loss = np.empty(len(rows))
        for f in range(plan.k):
            test = folds == f
            train = rows[~test]
            beta, b0 = fit_rows(data, train, spec, ctrl, warm, warm_intercept)
            eta = b0 + data.X[rows[test]] @ beta
            loss[test] = deviance(eta, y[test]) if binomial else (y[test] - eta) ** 2
        values.append(loss.mean() if binomial else np.sqrt(loss.mean()))
    return float(np.mean(values))


def cv_criterion(best_subsets: dict, data: Dataset, plan: CVPlan, ctrl: Optional[SearchControl] = None) -> dict:
    """CV criterion of every grid cell, computed on that cell's best subset.

    Fold assignments come from a stream keyed by the cell's position in the
    grid and the repeat number, so the surface does not depend on the order
    of evaluation.
    """
    alphas = sorted({a for a, _ in best_subsets})
    lams = sorted({l for _, l in best_subsets}, reverse=True)
    ai = {a: i for i, a in enumerate(alphas)}
    li = {l: i for i, l in enumerate(lams)}
    out = {}
    for (a, l), fit in best_subsets.items():
        c = ctrl or SearchControl(h=fit.h)
        out[(a, l)] = cv_rows(
            data, fit.indices, PenaltySpec(a, l), plan, (ai[a], li[l]), fit.beta, fit.intercept, c
        )
    return out


def select_optimal(surface: dict):
    """Cell with the smallest criterion; ties go to larger lambda, then smaller alpha."""
    if not surface:
        raise ValueError("empty criterion surface")
    (a, l), _ = min(surface.items(), key=lambda kv: (kv[1], -kv[0][1], kv[0][0]))
    return a, l
