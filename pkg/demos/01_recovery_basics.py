"""
Robust recovery of a rank-1 matrix from corrupted measurements
==============================================================

One tenth of the measurements carry Gaussian outliers a hundred times
larger than the signal scale.  Subgradient descent on the l1 loss
recovers the planted matrix anyway, with the true rank or with the
factor rank fully over-parameterized; plain gradient descent on the
smooth l2 loss fits the outliers instead.
"""

import numpy as np

import signrip as sr

d, m = 30, 400
truth = sr.gen_ground_truth(d, 1, seed=0)
ensemble = sr.gen_ensemble(d, m, seed=1)
noise = sr.gen_noise(m, sr.NoiseSpec(p=0.1, dist="gaussian", scale=10.0, seed=2))
y = sr.measure(ensemble, truth, noise)
print(f"instance: d={d}, m={m}, {len(noise.support)} corrupted measurements")

# exact-rank run: factor has the true rank 1
u0 = sr.spectral_init(ensemble, y, 1, alpha=0.1)
u_exact, rec_exact = sr.subgd(ensemble, y, u0, sr.QNormGeometric(0.4, 0.99),
                              800, truth=truth)
print(f"subgd, r'=1:  final error {rec_exact.final('err_frob'):.2e}")

# over-parameterized run: factor rank d, nothing tells the solver r*=1.
# a smaller init scale keeps the redundant directions from contributing.
u0 = sr.spectral_init(ensemble, y, d, alpha=0.02)
u_over, rec_over = sr.subgd(ensemble, y, u0, sr.QNormGeometric(0.4, 0.99),
                            800, truth=truth)
print(f"subgd, r'={d}: final error {rec_over.final('err_frob'):.2e}")

# the same over-parameterized instance under l2 gradient descent
u0 = sr.spectral_init(ensemble, y, d, alpha=0.02)
u_gd, rec_gd = sr.gd_l2(ensemble, y, u0, sr.Constant(0.01), 1000, truth=truth)
print(f"gd,    r'={d}: final error {rec_gd.final('err_frob'):.2e} "
      f"(l2 loss {rec_gd.final('loss_l2'):.3g}, driven into the outliers)")

# where did each run land?  the classifier needs a deficiency radius;
# estimate one from the ensemble itself
delta = sr.estimate_sign_rip(ensemble, noise, 2, 100, seed=3).delta_hat
for label, u in (("subgd r'=1", u_exact), (f"subgd r'={d}", u_over), ("gd", u_gd)):
    print(f"{label:12s} -> {sr.classify_stationary(u, truth, delta).value}")

# error history of the over-parameterized subgd run, every 100 steps
t = rec_over.column("t")[::100]
err = rec_over.column("err_frob")[::100]
print("\n  t    error")
for ti, ei in zip(t, err):
    print(f"{int(ti):5d}  {ei:.2e}")
