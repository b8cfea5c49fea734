import math

import numpy as np
import pytest
from scipy.stats import norm

from enetlts.simulation import (
    SimScheme,
    ar1_block,
    gen_linear,
    gen_logistic,
    metric_fpr_fnr,
    metric_mcr,
    metric_mnll,
    metric_precision,
    metric_rmspe,
    preset,
    run_study,
    summarize,
)
from enetlts.data import Dataset
from oracles import ar1_var_sum


def test_linear_blocks_and_beta():
    s = preset("linear-low")
    assert (s.n, s.p) == (150, 60)
    assert s.block_sizes == (3, 3, 54) and s.block_rhos == (0.9, 0.9, 0.2)
    assert s.beta_true.sum() == 6 and np.all(s.beta_true[:6] == 1)


def test_logistic_blocks_and_beta():
    s = preset("logistic-low")
    assert (s.n, s.p) == (150, 50) and s.block_sizes == (5, 45)
    assert s.beta_true.sum() == 5


def test_presets():
    assert {(preset(k).n, preset(k).p) for k in ("linear-high", "logistic-high")} == {(50, 100)}
    with pytest.raises(KeyError):
        preset("nope")


def test_ar1_autocorrelation():
    x = ar1_block(10_000, 3, 0.9, np.random.default_rng(0))
    assert np.corrcoef(x[:, 0], x[:, 1])[0, 1] == pytest.approx(0.9, abs=0.05)
    assert np.corrcoef(x[:, 0], x[:, 2])[0, 1] == pytest.approx(0.81, abs=0.05)
    assert x.std(axis=0) == pytest.approx(np.ones(3), abs=0.05)


def test_clean_informative_block_is_bounded():
    for seed in range(5):
        train, _, _ = gen_linear(preset("linear-low", 0.0, seed=seed))
        assert np.abs(train.X[:, :6]).max() < 6


def test_linear_contamination():
    s = preset("linear-high", 0.1, seed=2)
    train, test, beta = gen_linear(s)
    m = math.ceil(0.1 * 50)
    assert np.all(train.X[:m, :10] > 14) and np.all(np.abs(train.X[m:, :10]) < 8)
    # contaminated responses are recomputed from the contaminated rows
    assert np.all(train.y[:m] > train.y[m:].max())
    assert test.n == 50 and np.abs(test.X[:, :10]).max() < 8


def test_logistic_contamination_counts():
    s = preset("logistic-low", 0.1, seed=4)
    train, _, _ = gen_logistic(s)
    clean, _, _ = gen_logistic(preset("logistic-low", 0.0, seed=4))
    n0 = clean.n0
    moved = np.flatnonzero(np.any(train.X != clean.X, axis=1))
    assert len(moved) == math.floor(0.1 * n0)
    assert np.all(clean.y[moved] == 0) and np.all(train.y[moved] == 1)
    kept = gen_logistic(preset("logistic-low", 0.1, seed=4, flip_labels=False))[0]
    assert np.all(kept.y[moved] == 0)


def test_flip_count_example():
    s = SimScheme(n=150, p=50, family="binomial", contamination_rate=0.1, seed=0)
    for seed in range(40):
        s.seed = seed
        clean = gen_logistic(SimScheme(n=150, p=50, family="binomial", seed=seed))[0]
        if clean.n0 == 75:
            train = gen_logistic(s)[0]
            assert train.n1 - clean.n1 == 7
            return
    pytest.skip("no seed with n0 = 75")


def test_class_balance_matches_latent_model():
    s = SimScheme(n=10_000, p=50, family="binomial", seed=1)
    train, _, _ = gen_logistic(s)
    sd = math.sqrt(1 + ar1_var_sum(5, 0.9))
    assert abs(train.y.mean() - norm.cdf(1 / sd)) < 0.02


def test_scheme_validation():
    with pytest.raises(ValueError):
        SimScheme(n=10, p=10, family="poisson")
    with pytest.raises(ValueError):
        SimScheme(n=10, p=10, block_sizes=(5, 4), block_rhos=(0.1, 0.2))
    with pytest.raises(ValueError):
        SimScheme(n=10, p=10, contamination_rate=0.6)


def test_metrics_examples(rng):
    X = rng.standard_normal((200, 3))
    beta = np.array([1.0, 0.0, -1.0])
    test = Dataset(X, 1 + X @ beta)
    assert metric_rmspe(beta, 1.0, test) == pytest.approx(0.0, abs=1e-12)
    eps = rng.standard_normal(200)
    noisy = Dataset(X, 1 + X @ beta + eps)
    assert metric_rmspe(beta, 1.0, noisy) == pytest.approx(np.sqrt(np.mean(eps**2)))
    yb = np.r_[np.zeros(100), np.ones(100)]
    bt = Dataset(X, yb, "binomial")
    assert metric_mnll(np.zeros(3), 0.0, bt) == pytest.approx(math.log(2))
    sep = Dataset(np.r_[-np.ones(100), np.ones(100)][:, None], yb, "binomial")
    assert metric_mnll(np.array([10.0]), 0.0, sep) <= 5e-5
    flipped = Dataset(sep.X, 1 - yb, "binomial")
    assert metric_mnll(np.array([-10.0]), 0.0, flipped) == metric_mnll(np.array([10.0]), 0.0, sep)
    assert metric_mcr(np.array([10.0]), 0.0, sep) == 0
    assert metric_mcr(np.array([-10.0]), 0.0, sep) == 1
    assert metric_precision(np.zeros(6), 1.0, np.ones(6), 1.0) == pytest.approx(math.sqrt(6))
    assert metric_precision(2 * np.ones(3), 3.0, np.zeros(3), 1.0) == pytest.approx(2 * metric_precision(np.ones(3), 2.0, np.zeros(3), 1.0))
    assert metric_fpr_fnr(beta, beta) == (0.0, 0.0)
    assert metric_fpr_fnr(np.zeros(3), beta) == (0.0, 1.0)
    assert metric_fpr_fnr(np.ones(3), beta)[0] == 1.0


def test_run_study_reproducible_and_schema():
    s = preset("linear-low", 0.1, seed=3)
    kw = dict(alphas=[0.5], lambda_fracs=[1.0, 0.5], n_elemental=20, n_keep=2)
    a = run_study(s, replications=1, fit_kwargs=kw)
    b = run_study(s, replications=1, fit_kwargs=kw)
    assert [r.long_rows() for r in a] == [r.long_rows() for r in b]
    assert [r.estimator for r in a] == ["enet", "enet-lts-raw", "enet-lts"]
    assert {m for r in a for _, _, m, _ in r.long_rows()} == {"rmspe", "precision", "fpr", "fnr"}
    assert run_study(s, estimators=[], replications=2) == []
    summary = summarize(a)
    assert set(summary) == {"enet", "enet-lts-raw", "enet-lts"}


def test_run_study_records_failures():
    s = preset("linear-low", 0.1, seed=3)
    out = run_study(s, estimators=["enet-lts"], replications=1, fit_kwargs=dict(n_elemental=0))
    assert out[0].error and out[0].long_rows() == []
