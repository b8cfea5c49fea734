"""Outlier flagging from the raw fit and the reweighted refit."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import norm

from ._search import SearchControl, fit_rows
from .data import Dataset, Standardizer, SubsetFit, backtransform
from .exceptions import AllZeroWeights
from .solver import DEFAULT_CONTROL, PenaltySpec, clamp_prob, sigmoid
from .tuning import DEFAULT_LAMBDA_FRACS, CVPlan, cv_rows, lambda0

DEFAULT_DELTA = 0.0125
# stream id of the lambda update CV, disjoint from grid-cell keys
_REWEIGHT_STREAM = 1_000_000


@dataclass
class WeightVector:
    w: np.ndarray
    n_w: int
    threshold: float


@dataclass
class ReweightedFit:
    beta: np.ndarray
    intercept: float
    lambda_upd: float
    lambda0: float
    cv_curve: dict = field(default_factory=dict)


def trimmed_scale(residuals, subset) -> float:
    """Consistency-corrected scale of the residuals in ``subset``.

    The root mean square of the median-centered subset residuals, divided by
    ``sqrt(1 - (2n/h) q phi(q))`` with ``q = Phi^-1((h/n + 1) / 2)``, which
    makes it unbiased for normal errors trimmed symmetrically to ``h`` of ``n``.
    """
    r = np.asarray(residuals, dtype=float)
    rh = r[np.asarray(subset, dtype=np.intp)]
    n, h = len(r), len(rh)
    if h < 2:
        raise ValueError("trimmed_scale needs at least two subset residuals")
    s_h = np.sqrt(np.mean((rh - np.median(rh)) ** 2))
    if h >= n:
        return float(s_h)
    q = norm.ppf((h / n + 1) / 2)
    factor = 1 - (2 * n / h) * q * norm.pdf(q)
    return float(s_h / np.sqrt(factor))


def standardized_residuals(fit: SubsetFit, data: Dataset, clamp: float = DEFAULT_CONTROL.prob_clamp) -> np.ndarray:
    """Residuals on a standard normal scale.

    gaussian: residuals centered by their median over the subset and divided
    by :func:`trimmed_scale`. binomial: Pearson residuals
    ``(y - pi) / sqrt(pi (1 - pi))``.
    """
    eta = fit.scores(data.X)
    if data.family == "binomial":
        pi = clamp_prob(sigmoid(eta), clamp)
        return (data.y - pi) / np.sqrt(pi * (1 - pi))
    r = data.y - eta
    sigma = trimmed_scale(r, fit.indices)
    if sigma <= 0:
        return np.zeros_like(r)
    return (r - np.median(r[fit.indices])) / sigma


def outlier_weights(r_std, delta: float = DEFAULT_DELTA) -> WeightVector:
    """Binary weights: 1 where ``|r| <= Phi^-1(1 - delta)``, else 0."""
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 0.5)")
    thr = float(norm.ppf(1 - delta))
    w = (np.abs(np.asarray(r_std, dtype=float)) <= thr).astype(float)
    n_w = int(w.sum())
    if n_w == 0:
        raise AllZeroWeights("every observation was flagged as an outlier")
    return WeightVector(w, n_w, thr)


def reweighted_fit(
    data: Dataset,
    weights: WeightVector,
    alpha_opt: float,
    lambda_fracs=DEFAULT_LAMBDA_FRACS,
    plan: CVPlan = CVPlan(),
    lambdas=None,
    standardizer: Optional[Standardizer] = None,
    ctrl: Optional[SearchControl] = None,
    warm: Optional[SubsetFit] = None,
) -> ReweightedFit:
    """Refit on the rows with weight 1 at ``alpha_opt`` and an updated lambda.

    Unless ``lambdas`` is given, the candidate lambdas are ``lambda_fracs``
    times a lambda0 recomputed on the weighted rows. ``lambda_upd`` minimizes
    the CV criterion over those rows. With ``standardizer`` the coefficients
    are mapped back to the original scale.
    """
    if weights.n_w == 0:
        raise AllZeroWeights("every observation was flagged as an outlier")
    rows = np.flatnonzero(weights.w == 1)
    if len(rows) < 5:
        raise ValueError(f"reweighting needs at least 5 retained rows, got {len(rows)}")
    ctrl = ctrl or SearchControl(h=len(rows))
    sub = data.take(rows)
    lam0 = lambda0(sub)
    if lambdas is None:
        lambdas = lam0 * np.asarray(lambda_fracs, dtype=float)
    lambdas = np.unique(np.asarray(lambdas, dtype=float))[::-1]
    wb = None if warm is None else warm.beta
    wi = None if warm is None else warm.intercept
    curve = {}
    if len(lambdas) == 1:
        lam_upd = float(lambdas[0])
    else:
        for li, lam in enumerate(lambdas):
            curve[float(lam)] = cv_rows(
                data, rows, PenaltySpec(alpha_opt, lam), plan, (_REWEIGHT_STREAM, li), wb, wi, ctrl
            )
        lam_upd = min(curve.items(), key=lambda kv: (kv[1], -kv[0]))[0]
    beta, b0 = fit_rows(data, rows, PenaltySpec(alpha_opt, lam_upd), ctrl, wb, wi)
    if standardizer is not None:
        beta, b0 = backtransform(beta, b0, standardizer)
    return ReweightedFit(beta, b0, float(lam_upd), float(lam0), curve)
