"""
Joint success and indicator correlation: closed form against simulation
========================================================================

All antennas of a receiver see the same interferers, so their successes are
correlated.  The closed forms below are compared with the conditioned Monte
Carlo estimator, which averages the exact fading-integrated success
probability over sampled Poisson point patterns.
"""

from simocorr import analytic as an
from simocorr import mcsim

params = an.NormalizedParams(Delta=0.25, delta=0.5)   # alpha = 4
cfg = mcsim.SimConfig.from_normalized(params, n_antennas=8, num_realizations=50_000, seed=1)
print(f"disk radius {cfg.radius:.1f}, {cfg.mean_points:.1f} interferers per realization")

print("\n n   closed form   independent   Monte Carlo (z)")
for n in (1, 2, 4, 8):
    exact = an.joint_success_prob(params, n, 1.0)
    est = mcsim.estimate_joint_success(cfg, n, 1.0)
    print(f"{n:2d}   {exact:.6f}      {an.independent_joint_prob(params, n, 1.0):.6f}"
          f"      {est.mean:.6f} ({est.z_score(exact):+.2f})")

# the naive estimator averages indicators; conditioning removes the fading noise
naive = mcsim.estimate_joint_success(cfg, 2, 1.0, method="naive")
cond = mcsim.estimate_joint_success(cfg, 2, 1.0, method="conditioned")
print(f"\nstd error for n=2: naive {naive.std_error:.2e}, conditioned {cond.std_error:.2e}")

# correlation of the success indicators falls from 1 - delta toward 0 with contention
print("\nDelta  delta  correlation  Monte Carlo")
for Delta in (0.1, 1.0):
    for delta in (0.25, 0.5, 0.75):
        p = an.NormalizedParams(Delta, delta)
        zeta = an.indicator_correlation(p, 1.0)
        c = mcsim.SimConfig.from_normalized(p, n_antennas=2, num_realizations=20_000, seed=2)
        est = mcsim.estimate_indicator_correlation(c, 1.0, resamples=50)
        print(f"{Delta:5}  {delta:5}  {zeta:.5f}      {est.mean:.5f} +- {est.std_error:.5f}")
