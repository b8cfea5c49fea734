"""End-to-end fitting: the enet-LTS estimator and a classical elastic net."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._search import SearchControl, h_default, run_grid
from .data import Dataset, ModelFit, backtransform, robust_standardize, subset_standardize
from .exceptions import AllZeroWeights
from .linear import elemental_search_linear, refine_linear
from .logistic import PhiControl, balanced_split, elemental_search_logistic, refine_logistic
from .reweighting import DEFAULT_DELTA, outlier_weights, reweighted_fit, standardized_residuals
from .solver import DEFAULT_CONTROL, PenaltySpec, SolverControl, fit_penalized, null_lambda, sigmoid
from .tuning import (
    DEFAULT_ALPHAS,
    DEFAULT_LAMBDA_FRACS,
    CVPlan,
    TuningGrid,
    cv_criterion,
    fold_ids,
    lambda0,
    select_optimal,
)


def _as_dataset(X, y, family) -> Dataset:
    return X if isinstance(X, Dataset) else Dataset(X, y, family)


def enet_lts(
    X,
    y=None,
    family: str = "gaussian",
    *,
    alphas=DEFAULT_ALPHAS,
    lambda_fracs=DEFAULT_LAMBDA_FRACS,
    h: Optional[int] = None,
    fraction: float = 0.75,
    cv: Optional[CVPlan] = None,
    seed: int = 0,
    n_elemental: int = 500,
    n_keep: int = 10,
    max_csteps: int = 20,
    subset_scaling: bool = False,
    delta: float = DEFAULT_DELTA,
    reweight: bool = True,
    phi: PhiControl = PhiControl(),
    solver: SolverControl = DEFAULT_CONTROL,
    n_jobs: int = 1,
    names=None,
) -> ModelFit:
    """Fit the trimmed elastic-net estimator with CV-tuned penalties.

    Parameters
    ----------
    X : (n, p) array or Dataset
    y : (n,) array
        Continuous response, or 0/1 labels for ``family="binomial"``.
    alphas, lambda_fracs : arrays
        Mixing values and multiples of lambda0 spanning the tuning grid.
    h : int, optional
        Subset size; defaults to ``floor((n + 1) * fraction)``.
    cv : CVPlan, optional
        Defaults to 5 repeats of 5-fold CV seeded from ``seed``.
    delta : float
        Tail probability for flagging outliers in the reweighting step.
    names : sequence of str, optional
        Column names used in error messages.

    Returns
    -------
    ModelFit
        Raw and reweighted coefficients on the original scale. ``diagnostics``
        holds lambda0, the per-cell best subsets and stage timings.
    """
    data = _as_dataset(X, y, family)
    timings = {}
    t0 = time.perf_counter()
    std, s = robust_standardize(data, names)
    h = h_default(data.n, fraction) if h is None else int(h)
    ctrl = SearchControl(
        h=h,
        n_elemental=n_elemental,
        n_keep=min(n_keep, n_elemental),
        max_csteps=max_csteps,
        seed=seed,
        subset_scaling=subset_scaling,
        n_jobs=n_jobs,
        solver=solver,
    )
    plan = cv if cv is not None else CVPlan(seed=seed)
    grid = TuningGrid(lambda0(std), alphas, lambda_fracs)

    if std.family == "gaussian":
        if std.n < 4:
            raise ValueError("at least 4 observations are required")
        first = lambda spec: elemental_search_linear(std, spec, ctrl)
        refine = lambda nb, spec: refine_linear(nb, std, spec, ctrl)
    else:
        split = balanced_split(std.n0, std.n1, h)
        first = lambda spec: elemental_search_logistic(std, spec, split, ctrl, phi)
        refine = lambda nb, spec: refine_logistic(nb, std, spec, split, ctrl)

    def timed_first(spec):
        t = time.perf_counter()
        out = first(spec)
        timings["elemental"] = time.perf_counter() - t
        return out

    t = time.perf_counter()
    subsets = run_grid(grid.cells(), timed_first, refine)
    timings["grid"] = time.perf_counter() - t - timings["elemental"]

    t = time.perf_counter()
    surface = cv_criterion(subsets, std, plan, ctrl)
    alpha_opt, lambda_opt = select_optimal(surface)
    timings["cv"] = time.perf_counter() - t

    best = subsets[(alpha_opt, lambda_opt)]
    beta_raw, b0_raw = backtransform(best.beta, best.intercept, s)

    t = time.perf_counter()
    weights = np.ones(data.n)
    beta_rew, b0_rew, lambda_upd = beta_raw, b0_raw, lambda_opt
    reweighted = False
    if reweight:
        try:
            wv = outlier_weights(standardized_residuals(best, std, solver.prob_clamp), delta)
            weights = wv.w
            rw = reweighted_fit(std, wv, alpha_opt, grid.lambda_fracs, plan, standardizer=s, ctrl=ctrl, warm=best)
            beta_rew, b0_rew, lambda_upd = rw.beta, rw.intercept, rw.lambda_upd
            reweighted = True
        except AllZeroWeights:
            weights = np.ones(data.n)
    timings["reweighting"] = time.perf_counter() - t
    timings["total"] = time.perf_counter() - t0

    return ModelFit(
        family=data.family,
        beta_raw=beta_raw,
        intercept_raw=b0_raw,
        beta_rew=beta_rew,
        intercept_rew=b0_rew,
        alpha_opt=alpha_opt,
        lambda_opt=lambda_opt,
        lambda_upd=lambda_upd,
        best_subset=best.indices.copy(),
        weights=weights,
        cv_surface=surface,
        h=h,
        reweighted=reweighted,
        diagnostics={"lambda0": grid.lambda0, "subsets": subsets, "timings": timings, "standardizer": s},
    )


@dataclass
class EnetFit:
    """Classical elastic net tuned by k-fold CV."""

    family: str
    beta: np.ndarray
    intercept: float
    alpha: float
    lam: float
    cv_surface: dict = field(default_factory=dict)

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.beta + self.intercept

    def predict(self, X):
        eta = self.decision_function(X)
        return (eta > 0).astype(float) if self.family == "binomial" else eta


def enet_cv(
    X,
    y=None,
    family: str = "gaussian",
    *,
    alphas=DEFAULT_ALPHAS,
    lambda_fracs=DEFAULT_LAMBDA_FRACS,
    k: int = 5,
    seed: int = 0,
    solver: SolverControl = DEFAULT_CONTROL,
) -> EnetFit:
    """Non-robust elastic net on mean/sd standardized data.

    lambda runs over ``lambda_fracs`` times the exact null-model bound. One
    fold assignment is shared by all cells and the criterion is the mean
    squared error of the predicted response (probability for binomial).
    """
    data = _as_dataset(X, y, family)
    std, s = subset_standardize(data, np.arange(data.n))
    lam_max = null_lambda(std.family, std.X, std.y)
    grid = TuningGrid(lam_max if lam_max > 0 else 1.0, alphas, lambda_fracs)
    binomial = std.family == "binomial"
    folds = fold_ids(std.y, k, np.random.default_rng([seed, 2]), stratified=binomial)
    surface = {}
    for a in grid.alphas:
        warm = [None] * k
        for lam in grid.lambdas:
            spec = PenaltySpec(float(a), float(lam))
            err = np.empty(std.n)
            for f in range(k):
                test = folds == f
                beta, b0 = fit_penalized(std.family, std.X[~test], std.y[~test], spec, warm[f], solver)
                warm[f] = beta
                eta = b0 + std.X[test] @ beta
                pred = sigmoid(eta) if binomial else eta
                err[test] = (std.y[test] - pred) ** 2
            surface[(float(a), float(lam))] = float(err.mean())
    a, lam = select_optimal(surface)
    beta, b0 = fit_penalized(std.family, std.X, std.y, PenaltySpec(a, lam), None, solver)
    beta, b0 = backtransform(beta, b0, s)
    return EnetFit(std.family, beta, b0, a, lam, surface)
