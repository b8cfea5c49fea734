import math

import numpy as np
import pytest

from enetlts._search import SearchControl, make_fit
from enetlts.data import Dataset, SubsetFit, robust_standardize
from enetlts.exceptions import InfeasibleSplit
from enetlts.logistic import (
    PhiControl,
    balanced_split,
    c_step_logistic,
    converge_logistic,
    elemental_search_logistic,
    grid_search_logistic,
    phi_by,
    refine_logistic,
    rho_c,
    rho_c_sup,
    subset_score,
)
from enetlts.solver import PenaltySpec, deviance, fit_penalized
from enetlts.tuning import lambda0
from oracles import exhaustive_logistic, phi_oracle, rho_ch


def test_balanced_split_examples():
    assert balanced_split(60, 40, 75) == (balanced_split(60, 40, 75).__class__(45, 30))
    s = balanced_split(50, 50, 76)
    assert s.h == 76 and abs(s.h0 - s.h1) <= 1
    assert (balanced_split(1, 9, 10).h0, balanced_split(1, 9, 10).h1) == (1, 9)
    assert balanced_split(2, 98, 95).h0 == 2
    with pytest.raises(InfeasibleSplit):
        balanced_split(5, 5, 11)
    # with the floor rule h1 never exceeds n1, so only h > n is infeasible
    for n0 in range(1, 12):
        for h in range(1, 13):
            s = balanced_split(n0, 12 - n0, h)
            assert 0 <= s.h0 <= n0 and 0 <= s.h1 <= 12 - n0 and s.h == h


def test_rho_matches_piecewise_oracle():
    for t in [0.0, 0.1, 0.5, 0.50001, 1.0, 3.0, 40.0]:
        assert rho_c(t) == pytest.approx(rho_ch(t), abs=1e-14)
    assert rho_c_sup() == pytest.approx(rho_ch(math.inf), abs=1e-15)
    # continuity at the knot
    assert rho_c(0.5 - 1e-12) == pytest.approx(rho_c(0.5 + 1e-12), abs=1e-10)


def test_phi_by_values():
    sup = rho_c_sup()
    assert phi_by(60.0, 1.0) == pytest.approx(sup, abs=1e-12)
    low = phi_by(-50.0, 1.0)
    assert 0 <= low <= sup and low < phi_by(0.0, 1.0)
    for s in (-3.0, 0.0, 0.7):
        assert phi_by(s, 1.0) == pytest.approx(phi_oracle(s, 1.0), abs=1e-14)
    grid = np.linspace(-30, 30, 1000)
    assert np.all(np.diff(phi_by(grid, 1.0)) >= 0)
    assert np.all(np.diff(phi_by(grid, 0.0)) <= 0)
    np.testing.assert_array_equal(phi_by(grid, 1.0), phi_by(-grid, 0.0))


def test_phi_control_validation():
    with pytest.raises(ValueError):
        PhiControl(0.0)


def test_subset_score_properties():
    x = np.r_[np.linspace(-4, -2, 6), np.linspace(2, 4, 6)]
    y = np.r_[np.zeros(6), np.ones(6)]
    d = Dataset(x[:, None], y, "binomial")
    rows = np.arange(12)
    zero = SubsetFit(rows, np.zeros(1), 0.0, np.nan, 0.5, 0.1)
    assert subset_score(zero, d) == pytest.approx(12 * phi_by(0.0, 0.0))
    good = SubsetFit(rows, np.array([3.0]), 0.0, np.nan, 0.5, 0.1)
    assert subset_score(good, d) > subset_score(zero, d)
    # a grossly misclassified extra row adds at most its own (tiny) phi value
    d2 = Dataset(np.r_[x, 40.0][:, None], np.r_[y, 0.0], "binomial")
    good_all = SubsetFit(np.arange(13), np.array([3.0]), 0.0, np.nan, 0.5, 0.1)
    delta = subset_score(good_all, d2) - subset_score(good, d2)
    assert 0 <= delta <= phi_by(120.0, 0.0) + 1e-12 and delta < 1e-3


def test_c_step_excludes_mislabeled_leverage_rows(rng):
    n = 40
    X = rng.standard_normal((n, 2))
    y = (X[:, 0] > 0).astype(float)
    class0 = np.flatnonzero(y == 0)
    bad = class0[: len(class0) // 10 or 1]
    X[bad, 0] = rng.normal(20, 1, len(bad))  # class 0 rows placed deep in class 1 territory
    d = Dataset(X, y, "binomial")
    clean = np.setdiff1d(np.arange(n), bad)
    spec = PenaltySpec(0.5, 0.02)
    beta, b0 = fit_penalized("binomial", X[clean], y[clean], spec)
    split = balanced_split(d.n0, d.n1, 30)
    start = SubsetFit(clean, beta, b0, np.nan, spec.alpha, spec.lam)
    nxt = c_step_logistic(start, d, spec, split, SearchControl(h=30))
    assert not set(bad) & set(nxt.indices)
    dev = deviance(b0 + X @ beta, y)
    for cls, k in ((0, split.h0), (1, split.h1)):
        idx = np.flatnonzero(y == cls)
        expect = np.sort(idx[np.argsort(dev[idx], kind="stable")[:k]])
        np.testing.assert_array_equal(nxt.indices[y[nxt.indices] == cls], expect)


def test_c_step_fixed_point_and_monotone(rng):
    for _ in range(15):
        n = int(rng.integers(16, 40))
        X = rng.standard_normal((n, int(rng.integers(1, 8))))
        y = (X[:, 0] + rng.standard_normal(n) > 0).astype(float)
        if min(y.sum(), n - y.sum()) < 3:
            continue
        d = Dataset(X, y, "binomial")
        h = (n + 1) * 3 // 4
        split = balanced_split(d.n0, d.n1, h)
        spec = PenaltySpec(rng.uniform(), rng.uniform(0.01, 0.2))
        ctrl = SearchControl(h=h)
        rows = np.r_[rng.choice(np.flatnonzero(y == 0), split.h0, replace=False),
                     rng.choice(np.flatnonzero(y == 1), split.h1, replace=False)]
        fit = make_fit(d, rows, spec, ctrl)
        for _ in range(8):
            nxt = c_step_logistic(fit, d, spec, split, ctrl)
            assert nxt.objective <= fit.objective * (1 + 1e-8)
            fit = nxt
        fixed = converge_logistic(fit, d, spec, split, ctrl)
        again = c_step_logistic(fixed, d, spec, split, ctrl)
        np.testing.assert_array_equal(again.indices, fixed.indices)


def _oracle_instance(seed):
    r = np.random.default_rng([11, seed])
    x = np.r_[r.normal(-1, 1, 6), r.normal(1, 1, 6)]
    y = np.r_[np.zeros(6), np.ones(6)]
    x[r.integers(0, 6)] = r.normal(4, 0.5)
    std, _ = robust_standardize(Dataset(x[:, None], y, "binomial"))
    return std, PenaltySpec(0.5, 0.2 * lambda0(std))


def test_exhaustive_oracle_small():
    agree = 0
    for seed in range(5):
        d, spec = _oracle_instance(seed)
        split = balanced_split(6, 6, 10)
        assert (split.h0, split.h1) == (5, 5)
        fit = elemental_search_logistic(d, spec, split, SearchControl(h=10, seed=seed))
        optima = exhaustive_logistic(d.X, d.y, 5, 5, spec.alpha, spec.lam,
                                     lambda rows: fit_penalized("binomial", d.X[list(rows)], d.y[list(rows)], spec))
        score = subset_score(fit, d)
        agree += abs(score - optima[0][0]) <= 1e-7
        assert score >= np.median([s for s, _, _ in optima]) - 1e-9
    assert agree >= 4


def test_separated_data_best_subset_classifies_correctly(rng):
    x = np.r_[rng.normal(-3, 0.5, 20), rng.normal(3, 0.5, 20)]
    y = np.r_[np.zeros(20), np.ones(20)]
    d = Dataset(x[:, None], y, "binomial")
    split = balanced_split(20, 20, 30)
    fit = elemental_search_logistic(d, PenaltySpec(0.5, 0.01), split, SearchControl(h=30, n_elemental=40, n_keep=5))
    pred = (fit.scores(d.X[fit.indices]) > 0).astype(float)
    assert np.all(pred == y[fit.indices])


def test_logistic_search_deterministic(rng):
    X = rng.standard_normal((30, 4))
    y = (X[:, 0] > 0).astype(float)
    d = Dataset(X, y, "binomial")
    split = balanced_split(d.n0, d.n1, 23)
    ctrl = SearchControl(h=23, n_elemental=30, n_keep=3, seed=4)
    a = elemental_search_logistic(d, PenaltySpec(0.5, 0.05), split, ctrl)
    b = elemental_search_logistic(d, PenaltySpec(0.5, 0.05), split, ctrl)
    np.testing.assert_array_equal(a.indices, b.indices)
    np.testing.assert_array_equal(a.beta, b.beta)


def test_grid_one_cell_and_fixed_points(rng):
    X = rng.standard_normal((40, 5))
    y = (X[:, 0] - X[:, 1] + rng.standard_normal(40) > 0).astype(float)
    d = Dataset(X, y, "binomial")
    ctrl = SearchControl(h=30, n_elemental=30, n_keep=3, seed=1)
    split = balanced_split(d.n0, d.n1, 30)
    single = grid_search_logistic(d, [(0.5, 0.1)], ctrl)
    ref = elemental_search_logistic(d, PenaltySpec(0.5, 0.1), split, ctrl)
    np.testing.assert_array_equal(single[(0.5, 0.1)].indices, ref.indices)
    cells = [(a, l) for a in (0.0, 0.5, 1.0) for l in (0.2, 0.1, 0.05)]
    out = grid_search_logistic(d, cells, ctrl)
    for (a, l), fit in out.items():
        nxt = c_step_logistic(fit, d, PenaltySpec(a, l), split, ctrl)
        np.testing.assert_array_equal(nxt.indices, fit.indices)


def test_warm_neighbour_needs_fewer_c_steps():
    from enetlts.simulation import generate, preset

    train = generate(preset("logistic-high", 0.1, seed=3))[0]
    std, _ = robust_standardize(train)
    lam0 = lambda0(std)
    ctrl = SearchControl(h=38, n_elemental=60, n_keep=5)
    split = balanced_split(std.n0, std.n1, 38)
    first = elemental_search_logistic(std, PenaltySpec(0.5, 0.5 * lam0), split, ctrl)
    spec = PenaltySpec(0.5, 0.45 * lam0)
    warm = refine_logistic(first, std, spec, split, ctrl)
    # a cold start from a fresh elemental subset runs its initial C-steps plus convergence
    cold = elemental_search_logistic(std, spec, split, ctrl)
    assert warm.n_csteps < cold.n_csteps + ctrl.n_initial_csteps
