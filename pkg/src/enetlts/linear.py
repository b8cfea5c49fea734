"""Trimmed elastic-net subset search for linear regression."""

from __future__ import annotations

import numpy as np

from ._search import (
    MAX_DRAW_RETRIES,
    SOLVER_FAILURES,
    SearchControl,
    distinct_best,
    fit_rows,
    h_default,
    iterate_csteps,
    make_fit,
    map_ordered,
    run_grid,
    smallest,
    trimmed_objective,
)
from .data import Dataset, SubsetFit
from .exceptions import DegenerateDraw
from .solver import PenaltySpec

__all__ = [
    "SearchControl",
    "h_default",
    "objective_linear",
    "c_step_linear",
    "converge_linear",
    "elemental_search_linear",
    "grid_search_linear",
]


def objective_linear(fit: SubsetFit, data: Dataset, subset_scaling: bool = False) -> float:
    """Trimmed sum of squares over ``fit.indices`` plus ``2 h lam P_alpha``."""
    spec = PenaltySpec(fit.alpha, fit.lam)
    return trimmed_objective(data, fit.indices, fit.beta, fit.intercept, spec, subset_scaling)


def _select(fit: SubsetFit, data: Dataset, h: int):
    r2 = (data.y - fit.scores(data.X)) ** 2
    return np.sort(smallest(r2, np.arange(data.n), h))


def c_step_linear(current: SubsetFit, data: Dataset, spec: PenaltySpec, ctrl: SearchControl) -> SubsetFit:
    """Keep the ``h`` rows with smallest squared residuals and refit on them."""
    rows = _select(current, data, ctrl.h)
    return make_fit(data, rows, spec, ctrl, warm=current.beta, n_csteps=current.n_csteps + 1)


def converge_linear(start: SubsetFit, data: Dataset, spec: PenaltySpec, ctrl: SearchControl) -> SubsetFit:
    return iterate_csteps(start, lambda f: c_step_linear(f, data, spec, ctrl), ctrl.max_csteps)


def _elemental_start(s: int, data: Dataset, spec: PenaltySpec, ctrl: SearchControl) -> SubsetFit:
    rng = np.random.default_rng([ctrl.seed, s])
    for _ in range(MAX_DRAW_RETRIES + 1):
        triple = np.sort(rng.choice(data.n, size=3, replace=False))
        try:
            beta, b0 = fit_rows(data, triple, spec, ctrl)
        except SOLVER_FAILURES:
            continue
        if not (np.all(np.isfinite(beta)) and np.isfinite(b0)):
            continue
        elemental = SubsetFit(triple, beta, b0, np.nan, spec.alpha, spec.lam)
        fit = make_fit(data, _select(elemental, data, ctrl.h), spec, ctrl, warm=beta)
        for _ in range(ctrl.n_initial_csteps):
            fit = c_step_linear(fit, data, spec, ctrl)
        return fit
    raise DegenerateDraw(f"elemental start {s} failed after {MAX_DRAW_RETRIES} retries")


def _best(fits):
    return min(fits, key=lambda f: (f.objective, f.key()))


def elemental_search_linear(data: Dataset, spec: PenaltySpec, ctrl: SearchControl) -> SubsetFit:
    """Best h-subset for one (alpha, lambda) from random three-point starts.

    Each start fits the penalized model on three random rows, expands to the
    ``h`` rows with smallest squared residuals and takes
    ``ctrl.n_initial_csteps`` C-steps. The ``ctrl.n_keep`` distinct subsets
    with smallest objective are iterated to convergence and the best one is
    returned (ties go to the lexicographically smallest index set).
    """
    if data.n < 4:
        raise ValueError("the linear search needs at least 4 observations")
    starts = map_ordered(lambda s: _elemental_start(s, data, spec, ctrl), range(ctrl.n_elemental), ctrl.n_jobs)
    keep = distinct_best(starts, ctrl.n_keep, key=lambda f: (f.objective, f.key()))
    final = map_ordered(lambda f: converge_linear(f, data, spec, ctrl), keep, ctrl.n_jobs)
    return _best(final)


def refine_linear(neighbour: SubsetFit, data: Dataset, spec: PenaltySpec, ctrl: SearchControl) -> SubsetFit:
    """Warm start: refit the neighbour's subset at ``spec`` and iterate C-steps."""
    start = make_fit(data, neighbour.indices, spec, ctrl, warm=neighbour.beta)
    return converge_linear(start, data, spec, ctrl)


def grid_search_linear(data: Dataset, grid, ctrl: SearchControl) -> dict:
    """Best subset for every (alpha, lambda) cell of ``grid``.

    Only the first cell (smallest alpha, largest lambda) runs the elemental
    search; the others start from a neighbouring cell's best subset.
    """
    return run_grid(
        grid,
        lambda spec: elemental_search_linear(data, spec, ctrl),
        lambda nb, spec: refine_linear(nb, data, spec, ctrl),
    )
