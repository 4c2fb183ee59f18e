"""
Outlier magnitude and shape barely matter
=========================================

The l1 subgradient direction depends on residuals only through their
signs, so once outliers are large enough to flip signs, making them
larger (or heavier-tailed) changes nothing.  Cauchy outliers have no
variance at all; the recovery error is the same as under Gaussians.
"""

import numpy as np

import signrip as sr

d, m, p = 20, 300, 0.1
policy = sr.Geometric(0.25, 0.99)

def median_error(dist, scale, trials=3):
    errs = []
    for t in range(trials):
        truth = sr.gen_ground_truth(d, 1, seed=10 + t)
        ensemble = sr.gen_ensemble(d, m, seed=20 + t)
        noise = sr.gen_noise(m, sr.NoiseSpec(p=p, dist=dist, scale=scale, seed=30 + t))
        y = sr.measure(ensemble, truth, noise)
        u0 = sr.spectral_init(ensemble, y, d, alpha=0.02)
        _, rec = sr.subgd(ensemble, y, u0, policy, 800, truth=truth)
        errs.append(rec.final("err_frob"))
    return float(np.median(errs))

# growing magnitude: three orders of magnitude, same error
print("gaussian outliers, growing standard deviation")
for sigma in (10.0, 100.0, 1000.0):
    print(f"  sigma={sigma:6.0f}: median error {median_error('gaussian', sigma):.4f}")

# different shapes at matched variance 100 (cauchy matched by scale)
print("\noutlier distributions at matched scale")
for dist, scale in (("gaussian", 10.0), ("uniform", 17.3205), ("laplace", 7.0711),
                    ("rademacher", 10.0), ("cauchy", 10.0)):
    print(f"  {dist:10s}: median error {median_error(dist, scale):.4f}")
