"""Trimmed elastic-net subset search for logistic regression.

Subsets keep the class proportions of the data, C-steps rank rows by their
deviance within each class, and candidate subsets are compared through the
bounded score function ``phi_by`` (larger sums are better).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._search import (
    MAX_DRAW_RETRIES,
    SOLVER_FAILURES,
    SearchControl,
    distinct_best,
    fit_rows,
    iterate_csteps,
    make_fit,
    map_ordered,
    run_grid,
    smallest,
    trimmed_objective,
)
from .data import Dataset, SubsetFit
from .exceptions import DegenerateDraw, InfeasibleSplit
from .solver import PenaltySpec, deviance


@dataclass(frozen=True)
class BalancedSplit:
    h0: int
    h1: int

    @property
    def h(self) -> int:
        return self.h0 + self.h1


@dataclass(frozen=True)
class PhiControl:
    c_by: float = 0.5

    def __post_init__(self):
        if not self.c_by > 0:
            raise ValueError("c_by must be positive")


def balanced_split(n0: int, n1: int, h: int) -> BalancedSplit:
    """Class counts ``h0 = floor((n0 + 1) h / n)``, ``h1 = h - h0``.

    ``h0`` is capped at ``n0``, which only matters for ``h`` close to ``n``.
    """
    n = n0 + n1
    if h > n:
        raise InfeasibleSplit(f"h={h} exceeds n={n}")
    h0 = min((n0 + 1) * h // n, n0)
    h1 = h - h0
    if h1 > n1 or h0 < 0:
        raise InfeasibleSplit(f"split ({h0}, {h1}) infeasible for class sizes ({n0}, {n1})")
    return BalancedSplit(h0, h1)


def rho_c(t, c: float = 0.5):
    """Croux-Haesbroeck rho: linear up to ``c``, then saturating."""
    t = np.asarray(t, dtype=float)
    sc = np.sqrt(c)
    tail = np.exp(-sc) * (2 + 2 * sc + c) - 2 * np.exp(-np.sqrt(np.maximum(t, c))) * (1 + np.sqrt(np.maximum(t, c)))
    return np.where(t <= c, t * np.exp(-sc), tail)


def rho_c_sup(c: float = 0.5) -> float:
    sc = np.sqrt(c)
    return float(np.exp(-sc) * (2 + 2 * sc + c))


def phi_by(score, y, ctrl: PhiControl = PhiControl()):
    """Bounded fit quality of a score: ``rho_c(inf) - rho_c(deviance)``.

    Close to the supremum for confidently correct scores, close to 0 for
    grossly misclassified ones.
    """
    return rho_c_sup(ctrl.c_by) - rho_c(deviance(score, y), ctrl.c_by)


def subset_score(fit: SubsetFit, data: Dataset, ctrl: PhiControl = PhiControl()) -> float:
    rows = fit.indices
    return float(np.sum(phi_by(fit.scores(data.X[rows]), data.y[rows], ctrl)))


def objective_logistic(fit: SubsetFit, data: Dataset, subset_scaling: bool = False) -> float:
    """Trimmed deviance over ``fit.indices`` plus ``h lam P_alpha``."""
    spec = PenaltySpec(fit.alpha, fit.lam)
    return trimmed_objective(data, fit.indices, fit.beta, fit.intercept, spec, subset_scaling)


def _select(fit: SubsetFit, data: Dataset, split: BalancedSplit):
    d = deviance(fit.scores(data.X), data.y)
    rows0 = smallest(d, np.flatnonzero(data.y == 0), split.h0)
    rows1 = smallest(d, np.flatnonzero(data.y == 1), split.h1)
    return np.sort(np.concatenate([rows0, rows1]))


def c_step_logistic(
    current: SubsetFit, data: Dataset, spec: PenaltySpec, split: BalancedSplit, ctrl: SearchControl
) -> SubsetFit:
    """Keep the ``h0``/``h1`` smallest-deviance rows of each class and refit."""
    rows = _select(current, data, split)
    return make_fit(
        data, rows, spec, ctrl, warm=current.beta, warm_intercept=current.intercept, n_csteps=current.n_csteps + 1
    )


def converge_logistic(start, data, spec, split, ctrl) -> SubsetFit:
    return iterate_csteps(start, lambda f: c_step_logistic(f, data, spec, split, ctrl), ctrl.max_csteps)


def _rank_key(data: Dataset, phi: PhiControl):
    return lambda f: (-subset_score(f, data, phi), f.objective, f.key())


def _elemental_start(s, data, spec, split, ctrl) -> SubsetFit:
    rng = np.random.default_rng([ctrl.seed, s])
    idx0 = np.flatnonzero(data.y == 0)
    idx1 = np.flatnonzero(data.y == 1)
    for _ in range(MAX_DRAW_RETRIES + 1):
        quad = np.sort(np.concatenate([rng.choice(idx0, 2, replace=False), rng.choice(idx1, 2, replace=False)]))
        try:
            beta, b0 = fit_rows(data, quad, spec, ctrl)
        except SOLVER_FAILURES:
            continue
        if not (np.all(np.isfinite(beta)) and np.isfinite(b0)):
            continue
        elemental = SubsetFit(quad, beta, b0, np.nan, spec.alpha, spec.lam)
        try:
            fit = make_fit(data, _select(elemental, data, split), spec, ctrl, warm=beta, warm_intercept=b0)
            for _ in range(ctrl.n_initial_csteps):
                fit = c_step_logistic(fit, data, spec, split, ctrl)
        except SOLVER_FAILURES:
            continue
        return fit
    raise DegenerateDraw(f"elemental start {s} failed after {MAX_DRAW_RETRIES} retries")


def elemental_search_logistic(
    data: Dataset, spec: PenaltySpec, split: BalancedSplit, ctrl: SearchControl, phi: PhiControl = PhiControl()
) -> SubsetFit:
    """Best class-balanced h-subset for one (alpha, lambda).

    Starts from random quadruples with two rows per class. Candidates and
    converged subsets are ranked by the sum of ``phi_by`` over the subset;
    ties go to the smaller trimmed objective, then the smaller index set.
    """
    if data.n0 < 2 or data.n1 < 2:
        raise ValueError("each class needs at least two observations")
    starts = map_ordered(
        lambda s: _elemental_start(s, data, spec, split, ctrl), range(ctrl.n_elemental), ctrl.n_jobs
    )
    key = _rank_key(data, phi)
    keep = distinct_best(starts, ctrl.n_keep, key=key)
    final = map_ordered(lambda f: converge_logistic(f, data, spec, split, ctrl), keep, ctrl.n_jobs)
    return min(final, key=key)


def refine_logistic(neighbour, data, spec, split, ctrl) -> SubsetFit:
    start = make_fit(data, neighbour.indices, spec, ctrl, warm=neighbour.beta, warm_intercept=neighbour.intercept)
    return converge_logistic(start, data, spec, split, ctrl)


def grid_search_logistic(
    data: Dataset, grid, ctrl: SearchControl, split: BalancedSplit = None, phi: PhiControl = PhiControl()
) -> dict:
    """Best class-balanced subset for every (alpha, lambda) cell of ``grid``."""
    if split is None:
        split = balanced_split(data.n0, data.n1, ctrl.h)
    return run_grid(
        grid,
        lambda spec: elemental_search_logistic(data, spec, split, ctrl, phi),
        lambda nb, spec: refine_logistic(nb, data, spec, split, ctrl),
    )
