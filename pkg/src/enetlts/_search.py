"""Machinery shared by the linear and logistic subset searches."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, SubsetFit, backtransform, subset_standardize
from .exceptions import DegenerateWeights, NoConvergence
from .solver import DEFAULT_CONTROL, PenaltySpec, SolverControl, deviance, fit_penalized, penalty_value

MAX_DRAW_RETRIES = 100
SOLVER_FAILURES = (NoConvergence, DegenerateWeights, FloatingPointError, ZeroDivisionError)


@dataclass
class SearchControl:
    """Settings of the C-step subset search.

    ``subset_scaling`` re-scales predictors by their standard deviation on
    every subset before fitting. It is off by default: the penalty then acts
    on a fixed scale and the trimmed objective is exactly non-increasing
    along C-steps.
    """

    h: int
    n_elemental: int = 500
    n_initial_csteps: int = 2
    n_keep: int = 10
    max_csteps: int = 20
    seed: int = 0
    subset_scaling: bool = False
    n_jobs: int = 1
    solver: SolverControl = field(default_factory=lambda: DEFAULT_CONTROL)

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("h must be at least 1")
        if self.n_keep > self.n_elemental:
            raise ValueError("n_keep cannot exceed n_elemental")
        if self.max_csteps < 1 or self.n_elemental < 1:
            raise ValueError("max_csteps and n_elemental must be positive")


def h_default(n: int, fraction: float = 0.75) -> int:
    """Subset size ``floor((n + 1) * fraction)``, capped at ``n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return min(int(np.floor((n + 1) * fraction)), n)


def map_ordered(fn, items, n_jobs: int = 1):
    """``[fn(x) for x in items]``, optionally on a thread pool; order is kept."""
    items = list(items)
    if n_jobs is None or n_jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    workers = None if n_jobs < 0 else n_jobs
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fit_rows(data: Dataset, rows, spec: PenaltySpec, ctrl: SearchControl, warm=None, warm_intercept=None):
    """Penalized fit on ``rows``; coefficients are returned on ``data``'s scale."""
    rows = np.asarray(rows, dtype=np.intp)
    X, y = data.X[rows], data.y[rows]
    if not ctrl.subset_scaling:
        return fit_penalized(data.family, X, y, spec, warm, ctrl.solver, warm_intercept)
    std_data, s = subset_standardize(Dataset(X, y, data.family), np.arange(len(rows)), on_zero="freeze")
    w = None if warm is None else np.asarray(warm) * s.scale
    wi = None
    if warm_intercept is not None and warm is not None:
        wi = warm_intercept - s.y_center + s.center @ np.asarray(warm)
    beta, b0 = fit_penalized(data.family, std_data.X, std_data.y, spec, w, ctrl.solver, wi)
    return backtransform(beta, b0, s)


def penalty_scale(data: Dataset, rows, subset_scaling: bool):
    """Scale on which the penalty acts for the subset ``rows``."""
    if not subset_scaling:
        return 1.0
    sd = data.X[np.asarray(rows, dtype=np.intp)].std(axis=0, ddof=1)
    return np.where(sd > 1e-12, sd, 1.0)


def trimmed_objective(data: Dataset, rows, beta, intercept, spec: PenaltySpec, subset_scaling=False) -> float:
    """Trimmed loss over ``rows`` plus the penalty at the package's scaling.

    gaussian: ``sum r_i^2 + 2 h lam P(beta)``; binomial: ``sum d_i + h lam P(beta)``.
    """
    rows = np.asarray(rows, dtype=np.intp)
    h = len(rows)
    eta = intercept + data.X[rows] @ beta
    pen = penalty_value(np.asarray(beta) * penalty_scale(data, rows, subset_scaling), spec.alpha)
    if data.family == "gaussian":
        r = data.y[rows] - eta
        return float(r @ r + 2 * h * spec.lam * pen)
    return float(np.sum(deviance(eta, data.y[rows])) + h * spec.lam * pen)


def make_fit(data, rows, spec, ctrl, warm=None, warm_intercept=None, n_csteps=0) -> SubsetFit:
    rows = np.sort(np.asarray(rows, dtype=np.intp))
    beta, b0 = fit_rows(data, rows, spec, ctrl, warm, warm_intercept)
    obj = trimmed_objective(data, rows, beta, b0, spec, ctrl.subset_scaling)
    return SubsetFit(rows, beta, b0, obj, spec.alpha, spec.lam, n_csteps)


def smallest(values, candidates, k):
    """The ``k`` entries of ``candidates`` with smallest ``values``; ties by index."""
    candidates = np.asarray(candidates, dtype=np.intp)
    order = np.lexsort((candidates, values[candidates]))
    return candidates[order[:k]]


def distinct_best(fits, k, key):
    """The ``k`` best fits under ``key`` with pairwise distinct index sets."""
    out, seen = [], set()
    for f in sorted(fits, key=key):
        if f.key() in seen:
            continue
        seen.add(f.key())
        out.append(f)
        if len(out) == k:
            break
    return out


def iterate_csteps(fit: SubsetFit, step, max_steps: int) -> SubsetFit:
    """Apply ``step`` until the index set repeats or ``max_steps`` is reached.

    On hitting the cap the current subset is accepted.
    """
    for _ in range(max_steps):
        new = step(fit)
        if np.array_equal(new.indices, fit.indices):
            return new
        fit = new
    return fit


def traverse_grid(grid):
    """Order cells by ascending alpha, then descending lambda."""
    cells = sorted({(float(a), float(l)) for a, l in grid}, key=lambda c: (c[0], -c[1]))
    if not cells:
        raise ValueError("the tuning grid is empty")
    return cells


def run_grid(grid, first, refine):
    """Solve every grid cell, warm-starting from a solved neighbour.

    ``first(spec)`` solves the first cell from scratch; ``refine(neighbour,
    spec)`` starts from a neighbouring cell's best subset. The neighbour is
    the previous lambda on the same alpha path, or the same lambda at the
    previous alpha for the first cell of a new path.
    """
    cells = traverse_grid(grid)
    out = {}
    prev_alpha = None
    last = None
    for a, l in cells:
        spec = PenaltySpec(a, l)
        if last is not None and last[0] != a:
            prev_alpha = last[0]
        if last is None:
            fit = first(spec)
        else:
            if last[0] == a:
                neighbour = out[last]
            elif (prev_alpha, l) in out:
                neighbour = out[(prev_alpha, l)]
            else:
                neighbour = out[last]
            fit = refine(neighbour, spec)
        out[(a, l)] = fit
        last = (a, l)
    return out
