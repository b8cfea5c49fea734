"""Looking inside a fit: lambda0, the grid and the CV surface."""

import numpy as np

from enetlts import enet_lts
from enetlts.simulation import gen_linear, preset

train = gen_linear(preset("linear-low", contamination_rate=0.1, seed=5))[0]
fit = enet_lts(train, alphas=[0.0, 0.25, 0.5, 0.75, 1.0], lambda_fracs=[1.0, 0.5, 0.25, 0.1, 0.05], seed=0)

print("lambda0 on the robust scale:", round(fit.diagnostics["lambda0"], 4))
alphas = sorted({a for a, _ in fit.cv_surface})
lams = sorted({l for _, l in fit.cv_surface}, reverse=True)

# CV criterion (RMSPE on each cell's best subset); rows alpha, columns lambda
print("alpha \\ lambda " + " ".join(f"{l:8.4f}" for l in lams))
for a in alphas:
    print(f"{a:14.2f} " + " ".join(f"{fit.cv_surface[(a, l)]:8.4f}" for l in lams))
print("chosen:", fit.alpha_opt, round(fit.lambda_opt, 4))

# each cell keeps its own best h-subset
subsets = fit.diagnostics["subsets"]
overlap = [len(np.intersect1d(s.indices, fit.best_subset)) for s in subsets.values()]
print(f"subset size h={fit.h}; overlap with the chosen subset ranges {min(overlap)}..{max(overlap)}")
print("stage timings (s):", {k: round(v, 3) for k, v in fit.diagnostics["timings"].items()})
