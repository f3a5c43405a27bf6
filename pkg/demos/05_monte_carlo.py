"""A small Monte Carlo: how often do 3-SE bands cover the truth?

The acceptance suite runs 200 replications; 40 is enough to see the picture.
"""

import time

import numpy as np

from hmdemand.demand import fit_hm, fit_original
from hmdemand.pipeline import distance_bundle
from hmdemand.synth import HM_PRESET, gen_panel, hm_truth, milk_truth, seeds

REPS = 40
start = time.perf_counter()

truth = milk_truth()
theta = np.concatenate([truth.intercepts, truth.b, truth.c.ravel()])
inside = []
for s in seeds(1, REPS):
    fit = fit_original(gen_panel(truth, 209, seed=s))
    R = fit.system.restrictions
    phi = np.linalg.lstsq(R.matrix, theta - R.offset, rcond=None)[0]
    inside.append(np.abs(fit.system.phi - phi) <= 3 * fit.system.se)
print(f"original: coverage {np.mean(inside):.3f}")

bundle = distance_bundle()
hm_t = hm_truth(bundle)
lam = []
for s in seeds(2, REPS):
    fit = fit_hm(gen_panel(hm_t, 209, seed=s), bundle.hedonic["HEDONIC"],
                 bundle.hedonic["NN-HEDONIC"], shares=bundle.chars.share)
    lam.append(fit.system.free("lambda_h"))
lam = np.array(lam)
print(f"HM: lambda_h mean {lam.mean():.4f} (truth {HM_PRESET['lambdas']['h']}), "
      f"sd {lam.std():.4f}, positive in {np.mean(lam > 0):.0%}")

# Longer panels shrink the error.
for weeks in (100, 400, 1600):
    errs = [np.abs(fit_original(gen_panel(truth, weeks, seed=s)).c - truth.c).max()
            for s in seeds(3, 15)]
    print(f"T={weeks:>5}: median max |c error| {np.median(errs):.5f}")

print(f"{time.perf_counter() - start:.1f} s")
