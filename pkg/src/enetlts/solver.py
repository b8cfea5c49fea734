"""Elastic-net solvers: coordinate descent (gaussian) and IRLS (binomial).

Both families use per-observation scaling of the loss,

    gaussian:  (1/(2m)) * RSS        + lam * P_alpha(beta)
    binomial:  (1/m) * sum deviances + lam * P_alpha(beta)

with an unpenalized intercept. Trimmed objectives elsewhere in the package
are these objectives multiplied by ``2h`` (gaussian) or ``h`` (binomial).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .exceptions import DegenerateWeights, NoConvergence


@dataclass(frozen=True)
class PenaltySpec:
    alpha: float
    lam: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.lam >= 0.0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")


@dataclass(frozen=True)
class SolverControl:
    coord_tol: float = 1e-7
    max_cd_passes: int = 100_000
    max_irls_iters: int = 50
    prob_clamp: float = 1e-5

    def __post_init__(self):
        if self.coord_tol <= 0 or self.max_cd_passes <= 0 or self.max_irls_iters <= 0:
            raise ValueError("solver tolerances and caps must be positive")
        if not 0.0 < self.prob_clamp < 0.5:
            raise ValueError("prob_clamp must lie in (0, 0.5)")


DEFAULT_CONTROL = SolverControl()


def penalty_value(beta, alpha: float) -> float:
    """Elastic-net penalty ``sum((1-alpha) b^2 / 2 + alpha |b|)``."""
    beta = np.asarray(beta, dtype=float)
    return float(np.sum(0.5 * (1.0 - alpha) * beta**2 + alpha * np.abs(beta)))


def soft_threshold(z, gamma):
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


def deviance(score, y):
    """Logistic deviance ``-y*s + log(1 + e^s)`` for 0/1 labels.

    Evaluated as ``log(1 + e^t)`` with ``t = (1 - 2y) s``, which is safe for
    large ``|s|`` and makes ``deviance(s, y) == deviance(-s, 1 - y)`` exact.
    """
    t = (1.0 - 2.0 * np.asarray(y, dtype=float)) * np.asarray(score, dtype=float)
    return np.logaddexp(0.0, t)


def sigmoid(eta):
    eta = np.asarray(eta, dtype=float)
    return np.exp(-np.logaddexp(0.0, -eta))


def clamp_prob(pi, clamp: float = DEFAULT_CONTROL.prob_clamp):
    return np.clip(pi, clamp, 1.0 - clamp)


def objective_gaussian(X, y, beta, intercept, spec: PenaltySpec) -> float:
    r = y - intercept - X @ beta
    return float(r @ r / (2 * len(y)) + spec.lam * penalty_value(beta, spec.alpha))


def objective_binomial(X, y, beta, intercept, spec: PenaltySpec) -> float:
    d = deviance(intercept + X @ beta, y)
    return float(d.mean() + spec.lam * penalty_value(beta, spec.alpha))


def _prepare(X, y, warm):
    X = np.asfortranarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be m x p with m matching len(y)")
    if X.shape[0] < 1:
        raise ValueError("at least one observation is required")
    if warm is None:
        beta = np.zeros(X.shape[1])
    else:
        beta = np.array(warm, dtype=float)
        if beta.shape != (X.shape[1],):
            raise ValueError("warm start has the wrong length")
    return X, y, beta


def fit_gaussian(X, y, spec: PenaltySpec, warm=None, ctrl: Optional[SolverControl] = None):
    """Elastic-net least squares by cyclic coordinate descent.

    Parameters
    ----------
    X : (m, p) array
    y : (m,) array
    spec : PenaltySpec
    warm : (p,) array, optional
        Starting coefficients.
    ctrl : SolverControl, optional

    Returns
    -------
    beta : (p,) array
    intercept : float

    Raises
    ------
    NoConvergence
        If ``ctrl.max_cd_passes`` sweeps do not reach ``ctrl.coord_tol``.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    X, y, beta = _prepare(X, y, warm)
    w = np.ones(len(y))
    beta, b0, passes, ok = _kernels.cd_weighted(
        X, y, w, float(spec.lam), float(spec.alpha), beta, ctrl.coord_tol, ctrl.max_cd_passes
    )
    if not ok:
        raise NoConvergence(f"coordinate descent did not converge in {passes} passes")
    return beta, float(b0)


def fit_binomial(
    X,
    y,
    spec: PenaltySpec,
    warm=None,
    ctrl: Optional[SolverControl] = None,
    warm_intercept: Optional[float] = None,
):
    """Elastic-net logistic regression by IRLS around coordinate descent.

    The cold start is the null model ``beta = 0`` with intercept
    ``log(n1/n0)``. Each accepted IRLS step does not increase the penalized
    mean deviance (the Newton step is halved until it does not).

    Raises
    ------
    NoConvergence
        Inner coordinate descent or the IRLS loop hit its cap.
    DegenerateWeights
        All working weights fell below 1e-10.
    """
    ctrl = ctrl or DEFAULT_CONTROL
    X, y, beta = _prepare(X, y, warm)
    n1 = float(y.sum())
    n0 = len(y) - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("fit_binomial needs both classes in y")
    b0 = np.log(n1 / n0) if warm_intercept is None else float(warm_intercept)
    beta, b0, status, it = _kernels.irls(
        X,
        y,
        float(spec.lam),
        float(spec.alpha),
        beta,
        float(b0),
        ctrl.coord_tol,
        ctrl.max_cd_passes,
        ctrl.max_irls_iters,
        ctrl.prob_clamp,
    )
    if status == 1:
        raise NoConvergence("coordinate descent inside IRLS did not converge")
    if status == 2:
        raise NoConvergence(f"IRLS did not converge in {it} iterations")
    if status == 3:
        raise DegenerateWeights("all IRLS weights vanished; the classes are separated")
    return beta, float(b0)


def fit_penalized(family: str, X, y, spec: PenaltySpec, warm=None, ctrl=None, warm_intercept=None):
    if family == "gaussian":
        return fit_gaussian(X, y, spec, warm, ctrl)
    return fit_binomial(X, y, spec, warm, ctrl, warm_intercept)


def null_lambda(family: str, X, y) -> float:
    """Smallest ``lam`` at which the lasso (alpha=1) fit is the null model."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    resid = y - y.mean()
    grad = (X - X.mean(axis=0)).T @ resid / len(y)
    return float(np.max(np.abs(grad))) if grad.size else 0.0


def kkt_residuals(X, y, beta, intercept, spec: PenaltySpec) -> np.ndarray:
    """Per-coordinate violation of the gaussian stationarity conditions."""
    X = np.asarray(X, dtype=float)
    r = y - intercept - X @ beta
    g = X.T @ r / len(y)
    l1, l2 = spec.lam * spec.alpha, spec.lam * (1 - spec.alpha)
    nz = beta != 0
    out = np.empty_like(beta)
    out[nz] = np.abs(g[nz] - l1 * np.sign(beta[nz]) - l2 * beta[nz])
    out[~nz] = np.maximum(np.abs(g[~nz]) - l1, 0.0)
    return out
