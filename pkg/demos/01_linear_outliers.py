"""Sparse linear regression when part of the data is rotten.

We draw a high-dimensional data set (n=50, p=100) with ten informative
predictors, push 10% of the rows far away in both x and y, and compare the
classical elastic net with the trimmed estimator.
"""

import numpy as np

from enetlts import enet_cv, enet_lts
from enetlts.simulation import gen_linear, metric_fpr_fnr, metric_rmspe, preset

scheme = preset("linear-high", contamination_rate=0.1, seed=42)
train, test, beta_true = gen_linear(scheme)
print(f"training rows: {train.n}, predictors: {train.p}, informative: {int(beta_true.sum())}")
print("first five responses (the contaminated ones):", np.round(train.y[:5], 1))

# a coarse grid keeps this demo under a minute
alphas = np.linspace(0, 1, 9)
fracs = np.arange(10, 0, -1) / 10

# classical elastic net, tuned by 5-fold CV
classical = enet_cv(train, alphas=alphas, lambda_fracs=fracs)

# trimmed fit: best 75% subset per (alpha, lambda), then a reweighting step
fit = enet_lts(train, alphas=alphas, lambda_fracs=fracs, seed=1)
print(f"\nselected alpha={fit.alpha_opt:.3f}, lambda={fit.lambda_opt:.4f}, updated lambda={fit.lambda_upd:.4f}")
print("rows flagged as outliers:", fit.outliers)

for name, (b, b0) in [
    ("elastic net", (classical.beta, classical.intercept)),
    ("enet-LTS raw", fit.coefficients("raw")),
    ("enet-LTS", fit.coefficients("reweighted")),
]:
    fpr, fnr = metric_fpr_fnr(b, beta_true)
    print(f"{name:>13}: test RMSPE {metric_rmspe(b, b0, test):6.3f}  nonzero {np.count_nonzero(b):3d}  FPR {fpr:.2f}  FNR {fnr:.2f}")

# the trimmed fit flags rows 0-4, the contaminated ones. A single draw can
# still favour either estimator; 03_simulation_study.py looks at medians.
