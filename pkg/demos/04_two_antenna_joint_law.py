"""
Joint SIR distribution at two antennas
=======================================

With different thresholds per antenna the joint success probability is
exp(-Delta (t1^(1+delta) - t2^(1+delta)) / (t1 - t2)).  On the diagonal it
reduces to the two-antenna joint success; with one threshold at zero it is
the single-antenna success probability.
"""

import numpy as np

from simocorr import analytic as an
from simocorr import mcsim

p = an.NormalizedParams(Delta=1.0, delta=0.5)
print("P(SIR1 > 2, SIR2 > 1)     =", an.joint_two_antenna_success(p, 2.0, 1.0))
print("independent interference   =", an.independent_two_antenna_success(p, 2.0, 1.0))
print("diagonal vs P_2            =", an.joint_two_antenna_success(p, 1.0, 1.0),
      an.joint_success_prob(p, 2, 1.0))
print("theta2 = 0 vs P_1          =", an.joint_two_antenna_success(p, 2.0, 0.0),
      an.single_success_prob(p, 2.0))

# the formula is continuous through the diagonal
for eps in (1e-3, 1e-8, 1e-12):
    print(f"  t1 = 1 + {eps:g}:", an.joint_two_antenna_success(p, 1.0 + eps, 1.0))

# joint distribution function on a small grid
grid = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
cdf = np.array([[an.joint_two_antenna_cdf(p, a, b) for b in grid] for a in grid])
print("\nP(SIR1 < t1, SIR2 < t2), rows t1, columns t2 =", grid)
print(np.round(cdf, 4))

cfg = mcsim.SimConfig.from_normalized(p, n_antennas=2, thresholds=(2.0, 1.0),
                                      num_realizations=50_000, seed=4)
est = mcsim.estimate_two_antenna_joint(cfg, 2.0, 1.0)
print(f"\nMonte Carlo: {est.mean:.5f} +- {est.std_error:.5f}")
