"""Simulation designs with block-correlated predictors, contamination and
performance measures for comparing estimators."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset
from .exceptions import DegenerateSample
from .solver import deviance

ESTIMATORS = ("enet", "enet-lts-raw", "enet-lts")
METRICS = ("rmspe", "mnll", "mcr", "precision", "fpr", "fnr")

# substream ids per purpose
_TRAIN, _TEST = 0, 1
_MAX_REDRAWS = 100


@dataclass
class SimScheme:
    """Sampling design.

    gaussian: three AR(1) blocks of sizes ``(0.05p, 0.05p, 0.9p)`` with
    correlations ``(0.9, 0.9, 0.2)``; binomial: two blocks ``(0.1p, 0.9p)``
    with ``(0.9, 0.5)``. The first 10% of coefficients are one, the rest zero.
    """

    n: int
    p: int
    family: str = "gaussian"
    contamination_rate: float = 0.0
    seed: int = 0
    n_test: Optional[int] = None
    block_sizes: Optional[tuple] = None
    block_rhos: Optional[tuple] = None
    intercept_true: float = 1.0
    beta_true: Optional[np.ndarray] = None
    flip_labels: bool = True

    def __post_init__(self):
        if self.family == "gaussian":
            pa = int(round(0.05 * self.p))
            sizes, rhos = (pa, pa, self.p - 2 * pa), (0.9, 0.9, 0.2)
        elif self.family == "binomial":
            pa = int(round(0.1 * self.p))
            sizes, rhos = (pa, self.p - pa), (0.9, 0.5)
        else:
            raise ValueError(f"unknown family {self.family!r}")
        self.block_sizes = tuple(self.block_sizes or sizes)
        self.block_rhos = tuple(self.block_rhos or rhos)
        if sum(self.block_sizes) != self.p or len(self.block_sizes) != len(self.block_rhos):
            raise ValueError("block sizes must sum to p and match the correlations")
        if not all(-1 < r < 1 for r in self.block_rhos):
            raise ValueError("block correlations must lie in (-1, 1)")
        if not 0 <= self.contamination_rate < 0.5:
            raise ValueError("contamination_rate must lie in [0, 0.5)")
        if self.n_test is None:
            self.n_test = self.n
        if self.beta_true is None:
            beta = np.zeros(self.p)
            beta[: self.n_informative] = 1.0
            self.beta_true = beta

    @property
    def n_informative(self) -> int:
        k = len(self.block_sizes) - 1
        return int(sum(self.block_sizes[:k]))


PRESETS = {
    "linear-low": dict(n=150, p=60, family="gaussian"),
    "linear-high": dict(n=50, p=100, family="gaussian"),
    "logistic-low": dict(n=150, p=50, family="binomial"),
    "logistic-high": dict(n=50, p=100, family="binomial"),
}


def preset(name: str, contamination_rate: float = 0.0, seed: int = 0, **kw) -> SimScheme:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return SimScheme(**PRESETS[name], contamination_rate=contamination_rate, seed=seed, **kw)


def ar1_block(n: int, size: int, rho: float, rng) -> np.ndarray:
    """Rows from ``N(0, Sigma)`` with ``Sigma_jk = rho^|j-k|``.

    Uses the bidiagonal Cholesky factor of the AR(1) correlation matrix.
    """
    z = rng.standard_normal((n, size))
    x = np.empty_like(z)
    if size == 0:
        return x
    x[:, 0] = z[:, 0]
    c = math.sqrt(1 - rho * rho)
    for j in range(1, size):
        x[:, j] = rho * x[:, j - 1] + c * z[:, j]
    return x


def _design(scheme: SimScheme, n: int, rng) -> np.ndarray:
    return np.hstack([ar1_block(n, s, r, rng) for s, r in zip(scheme.block_sizes, scheme.block_rhos)])


def gen_linear(scheme: SimScheme, replication: int = 0):
    """Training and clean test data for the linear design.

    Contamination replaces the informative predictors of the first
    ``ceil(rate * n)`` rows by ``N(20, 1)`` draws and their errors by
    ``N(20 * sd(y_clean), 1)`` draws.
    """
    if scheme.family != "gaussian":
        raise ValueError("gen_linear needs a gaussian scheme")
    beta, b0 = scheme.beta_true, scheme.intercept_true
    rng = np.random.default_rng([scheme.seed, replication, _TRAIN])
    X = _design(scheme, scheme.n, rng)
    eps = rng.standard_normal(scheme.n)
    y = b0 + X @ beta + eps
    m = math.ceil(scheme.contamination_rate * scheme.n)
    if m:
        sd_y = y.std(ddof=1)
        k = scheme.n_informative
        X[:m, :k] = rng.normal(20.0, 1.0, size=(m, k))
        eps[:m] = rng.normal(20.0 * sd_y, 1.0, size=m)
        y[:m] = b0 + X[:m] @ beta + eps[:m]
    rng_t = np.random.default_rng([scheme.seed, replication, _TEST])
    Xt = _design(scheme, scheme.n_test, rng_t)
    yt = b0 + Xt @ beta + rng_t.standard_normal(scheme.n_test)
    return Dataset(X, y, "gaussian"), Dataset(Xt, yt, "gaussian"), beta.copy()


def _draw_logistic(scheme, n, rng):
    for _ in range(_MAX_REDRAWS):
        X = _design(scheme, n, rng)
        eps = rng.standard_normal(n)
        y = (scheme.intercept_true + X @ scheme.beta_true + eps > 0).astype(float)
        if 0 < y.sum() < n:
            return X, y
    raise DegenerateSample("simulated labels kept containing a single class")


def gen_logistic(scheme: SimScheme, replication: int = 0):
    """Training and clean test data for the logistic design.

    Contamination takes the first ``floor(rate * n0)`` rows of class 0,
    replaces their informative predictors by ``N(20, 1)`` draws and, with
    ``scheme.flip_labels``, relabels them as class 1.
    """
    if scheme.family != "binomial":
        raise ValueError("gen_logistic needs a binomial scheme")
    rng = np.random.default_rng([scheme.seed, replication, _TRAIN])
    X, y = _draw_logistic(scheme, scheme.n, rng)
    class0 = np.flatnonzero(y == 0)
    m = int(math.floor(scheme.contamination_rate * len(class0)))
    if m:
        rows = class0[:m]
        k = scheme.n_informative
        X[rows, :k] = rng.normal(20.0, 1.0, size=(m, k))
        if scheme.flip_labels:
            y[rows] = 1.0
        if y.min() == y.max():
            raise DegenerateSample("contamination removed a class")
    rng_t = np.random.default_rng([scheme.seed, replication, _TEST])
    Xt, yt = _draw_logistic(scheme, scheme.n_test, rng_t)
    return Dataset(X, y, "binomial"), Dataset(Xt, yt, "binomial"), scheme.beta_true.copy()


def generate(scheme: SimScheme, replication: int = 0):
    return gen_linear(scheme, replication) if scheme.family == "gaussian" else gen_logistic(scheme, replication)


def metric_rmspe(beta_hat, intercept_hat, test: Dataset) -> float:
    r = test.y - intercept_hat - test.X @ beta_hat
    return float(np.sqrt(np.mean(r**2)))


def metric_mnll(beta_hat, intercept_hat, test: Dataset) -> float:
    return float(np.mean(deviance(intercept_hat + test.X @ beta_hat, test.y)))


def metric_mcr(beta_hat, intercept_hat, test: Dataset) -> float:
    pred = (intercept_hat + test.X @ beta_hat > 0).astype(float)
    return float(np.mean(pred != test.y))


def metric_precision(beta_hat, intercept_hat, beta_true, intercept_true) -> float:
    """Euclidean coefficient error, intercept included."""
    d = np.append(intercept_true - intercept_hat, np.asarray(beta_true) - np.asarray(beta_hat))
    return float(np.sqrt(d @ d))


def metric_fpr_fnr(beta_hat, beta_true, intercept_hat=None, intercept_true=None):
    """False positive and false negative rates of the estimated support.

    With both intercepts given they enter as coefficient 0. A rate whose
    denominator is empty is reported as 0.
    """
    bh, bt = np.asarray(beta_hat, dtype=float), np.asarray(beta_true, dtype=float)
    if intercept_hat is not None and intercept_true is not None:
        bh, bt = np.append(intercept_hat, bh), np.append(intercept_true, bt)
    zero, nonzero = bt == 0, bt != 0
    fpr = float(np.sum((bh != 0) & zero) / zero.sum()) if zero.any() else 0.0
    fnr = float(np.sum((bh == 0) & nonzero) / nonzero.sum()) if nonzero.any() else 0.0
    return fpr, fnr


@dataclass
class MetricsReport:
    replication: int
    estimator: str
    rmspe: Optional[float] = None
    mnll: Optional[float] = None
    mcr: Optional[float] = None
    precision: Optional[float] = None
    fpr: Optional[float] = None
    fnr: Optional[float] = None
    error: Optional[str] = None

    def long_rows(self):
        """Rows ``(replication, estimator, metric, value)`` for present metrics."""
        return [
            (self.replication, self.estimator, m, getattr(self, m))
            for m in METRICS
            if getattr(self, m) is not None
        ]


def evaluate(beta, b0, test: Dataset, beta_true, intercept_true, replication, name) -> MetricsReport:
    rep = MetricsReport(replication, name)
    if test.family == "gaussian":
        rep.rmspe = metric_rmspe(beta, b0, test)
    else:
        rep.mnll = metric_mnll(beta, b0, test)
        rep.mcr = metric_mcr(beta, b0, test)
    rep.precision = metric_precision(beta, b0, beta_true, intercept_true)
    rep.fpr, rep.fnr = metric_fpr_fnr(beta, beta_true, b0, intercept_true)
    return rep


def run_replication(scheme: SimScheme, estimators, replication: int, fit_kwargs: Optional[dict] = None):
    """Fit every estimator on one fresh training set and score it on clean test data."""
    from .estimators import enet_cv, enet_lts

    fit_kwargs = dict(fit_kwargs or {})
    estimators = list(estimators)
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise ValueError(f"unknown estimators {sorted(unknown)}")
    if not estimators:
        return []
    train, test, beta_true = generate(scheme, replication)
    b0_true = scheme.intercept_true
    seed = int(np.random.SeedSequence([scheme.seed, replication, 2]).generate_state(1)[0])
    out = []
    robust = None
    for name in estimators:
        try:
            if name == "enet":
                keys = ("alphas", "lambda_fracs", "solver")
                fit = enet_cv(train, family=train.family, seed=seed, **{k: fit_kwargs[k] for k in keys if k in fit_kwargs})
                beta, b0 = fit.beta, fit.intercept
            else:
                if robust is None:
                    robust = enet_lts(train, family=train.family, seed=seed, **fit_kwargs)
                beta, b0 = robust.coefficients("raw" if name == "enet-lts-raw" else "reweighted")
            out.append(evaluate(beta, b0, test, beta_true, b0_true, replication, name))
        except Exception as exc:  # recorded per replication, not fatal
            out.append(MetricsReport(replication, name, error=f"{type(exc).__name__}: {exc}"))
    return out


def _run_one(args):
    return run_replication(*args)


def run_study(scheme: SimScheme, estimators=ESTIMATORS, replications: int = 100, fit_kwargs=None, n_jobs: int = 1):
    """Metrics of every (replication, estimator) pair, ordered by replication then estimator."""
    jobs = [(scheme, list(estimators), r, fit_kwargs) for r in range(replications)]
    if n_jobs == 1 or replications < 2:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs) as pool:
            results = list(pool.map(_run_one, jobs))
    return [row for rep in results for row in rep]


def summarize(reports, statistic=np.median) -> dict:
    """``{estimator: {metric: statistic over replications}}``, skipping failed rows."""
    out = {}
    for est in dict.fromkeys(r.estimator for r in reports):
        rows = [r for r in reports if r.estimator == est and r.error is None]
        out[est] = {
            m: float(statistic([getattr(r, m) for r in rows]))
            for m in METRICS
            if rows and getattr(rows[0], m) is not None
        }
    return out
