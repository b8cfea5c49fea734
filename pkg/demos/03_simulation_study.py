"""A small simulation study.

Runs a few replications of a contaminated design and prints median
performance per estimator. Increase ``replications`` for stabler numbers;
the same study is available as ``enetlts simulate``.
"""

import numpy as np

from enetlts.simulation import preset, run_study, summarize

replications = 5
kw = dict(alphas=np.linspace(0, 1, 9), lambda_fracs=np.arange(10, 0, -1) / 10)

for name in ("linear-low", "logistic-low"):
    reports = run_study(preset(name, contamination_rate=0.1, seed=0), replications=replications, fit_kwargs=kw)
    print(f"\n{name}, {replications} replications, medians:")
    for est, metrics in summarize(reports).items():
        print(f"  {est:>13}: " + "  ".join(f"{m} {v:.3f}" for m, v in metrics.items()))

# rows of the long table: (replication, estimator, metric, value)
print("\nfirst rows of the long table:", reports[0].long_rows()[:2])
