import math

import numpy as np
import pytest

from enetlts._search import SearchControl, make_fit
from enetlts.data import Dataset, robust_standardize
from enetlts.solver import PenaltySpec, fit_penalized
from enetlts.tuning import (
    CVPlan,
    TuningGrid,
    cv_criterion,
    cv_rows,
    fold_ids,
    lambda0,
    point_biserial,
    select_optimal,
    winsorize,
    winsorized_correlations,
)


def test_grid_order_and_validation():
    g = TuningGrid(2.0, [1.0, 0.0, 0.5], [0.5, 1.0])
    assert g.cells() == [(0.0, 2.0), (0.0, 1.0), (0.5, 2.0), (0.5, 1.0), (1.0, 2.0), (1.0, 1.0)]
    with pytest.raises(ValueError):
        TuningGrid(0.0)
    with pytest.raises(ValueError):
        TuningGrid(1.0, [1.2])
    with pytest.raises(ValueError):
        TuningGrid(1.0, [0.5], [0.0])
    assert len(TuningGrid(1.0).cells()) == 41 * 40


def test_point_biserial_hand_example():
    d = Dataset(np.array([[1.0], [2.0], [3.0], [4.0]]), [0, 0, 1, 1], "binomial")
    assert point_biserial(d)[0] == pytest.approx(2 / 1.482602218505602 * math.sqrt(4 / 12), abs=1e-12)
    assert point_biserial(d)[0] == pytest.approx(0.7787, abs=5e-4)


def test_point_biserial_label_swap(rng):
    X = rng.standard_normal((30, 3))
    y = (X[:, 0] > 0).astype(float)
    a, b = Dataset(X, y, "binomial"), Dataset(X, 1 - y, "binomial")
    np.testing.assert_allclose(point_biserial(a), -point_biserial(b))
    assert lambda0(a) == pytest.approx(lambda0(b), rel=1e-12)


def test_point_biserial_zero_when_medians_match():
    x = np.array([1.0, 2.0, 3.0, 3.0, 2.0, 1.0])
    d = Dataset(x[:, None], [0, 0, 0, 1, 1, 1], "binomial")
    assert point_biserial(d)[0] == 0


def test_winsorized_correlation_exact_relation(rng):
    x = rng.standard_normal(100)
    d = Dataset(np.column_stack([x, rng.standard_normal(100)]), x)
    r = winsorized_correlations(d)
    assert r[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(r[1]) < 0.5


def test_winsorize_clips_at_two_mads(rng):
    X = rng.standard_normal((50, 2))
    X[0, 0] = 100
    w = winsorize(Dataset(X, rng.standard_normal(50)))
    med = np.median(X[:, 0])
    mad = 1.482602218505602 * np.median(np.abs(X[:, 0] - med))
    assert w.X[0, 0] == pytest.approx(med + 2 * mad)


def test_lambda0_duplicate_column_unchanged(rng):
    X = rng.standard_normal((40, 3))
    y = X[:, 1] + rng.standard_normal(40)
    a = lambda0(Dataset(X, y))
    b = lambda0(Dataset(np.column_stack([X, X[:, 1]]), y))
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("family", ["gaussian", "binomial"])
def test_lambda0_null_contract(rng, family):
    for _ in range(10):
        n, p = rng.integers(20, 80), rng.integers(2, 30)
        X = rng.standard_normal((n, p))
        y = X[:, 0] + rng.standard_normal(n)
        if family == "binomial":
            y = (y > 0).astype(float)
        std, _ = robust_standardize(Dataset(X, y, family))
        w = winsorize(std)
        beta, _ = fit_penalized(family, w.X, w.y, PenaltySpec(1.0, lambda0(std)))
        assert np.all(beta == 0)


def test_lambda0_noise_is_small(rng):
    X = rng.standard_normal((2000, 5))
    y = rng.standard_normal(2000)
    std, _ = robust_standardize(Dataset(X, y))
    assert lambda0(std) < 0.1


def test_fold_ids_balanced_and_stratified(rng):
    y = np.r_[np.zeros(23), np.ones(17)]
    f = fold_ids(y, 5, rng, stratified=True)
    counts = np.bincount(f, minlength=5)
    assert counts.max() - counts.min() <= 1
    for k in range(5):
        assert abs(np.sum(y[f == k]) - 17 / 5) <= 1
    g = fold_ids(y, 5, rng, stratified=False)
    assert np.bincount(g).max() - np.bincount(g).min() <= 1


def test_cv_perfect_fit_and_null_binomial(rng):
    X = rng.standard_normal((30, 2))
    d = Dataset(X, 1 + X @ [1.0, -2.0])
    v = cv_rows(d, np.arange(30), PenaltySpec(0.5, 1e-9), CVPlan(repeats=2))
    assert v < 1e-5
    yb = np.r_[np.zeros(15), np.ones(15)]
    db = Dataset(X, yb, "binomial")
    v = cv_rows(db, np.arange(30), PenaltySpec(0.5, 1e6), CVPlan(repeats=2))
    assert v == pytest.approx(math.log(2), abs=1e-9)


def test_cv_surface_deterministic_and_order_free(rng):
    X = rng.standard_normal((30, 3))
    d = Dataset(X, X[:, 0] + rng.standard_normal(30))
    ctrl = SearchControl(h=23)
    fits = {(a, l): make_fit(d, np.arange(23), PenaltySpec(a, l), ctrl) for a in (0.0, 1.0) for l in (0.5, 0.1)}
    plan = CVPlan(k=5, repeats=3, seed=9)
    s1 = cv_criterion(fits, d, plan, ctrl)
    s2 = cv_criterion(dict(reversed(list(fits.items()))), d, plan, ctrl)
    assert s1 == s2


def test_select_optimal_rules():
    assert select_optimal({(0.5, 1.0): 3.0}) == (0.5, 1.0)
    assert select_optimal({(0.5, 1.0): 3.0, (0.0, 0.5): 1.0, (1.0, 2.0): 2.0}) == (0.0, 0.5)
    assert select_optimal({(0.5, 1.0): 1.0, (0.25, 1.0): 1.0}) == (0.25, 1.0)
    assert select_optimal({(0.5, 1.0): 1.0, (0.25, 0.5): 1.0}) == (0.5, 1.0)
    with pytest.raises(ValueError):
        select_optimal({})


def test_cvplan_validation():
    with pytest.raises(ValueError):
        CVPlan(k=1)
    assert CVPlan().is_stratified("binomial") and not CVPlan().is_stratified("gaussian")
