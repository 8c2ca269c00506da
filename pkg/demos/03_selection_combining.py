"""
Selection combining and its heavy outage tail
==============================================

With selection combining the receiver succeeds if any antenna does.  The
inclusion-exclusion sum for this probability cancels catastrophically in
double precision, so the library evaluates it in extended precision.
"""

import math

from simocorr import analytic as an
from simocorr import mcsim

p = an.NormalizedParams(Delta=0.5, delta=0.5)

# what plain floating point makes of the alternating sum
for n in (16, 48, 64):
    naive = sum((-1) ** (k + 1) * math.comb(n, k) * an.joint_success_prob(p, k, 1.0)
                for k in range(1, n + 1))
    print(f"n={n}: double precision {naive:+.6e}   extended {an.selection_combining_prob(p, n, 1.0):.12f}")

# outage decays polynomially instead of geometrically
outage = an.selection_outage_curve(p, 128, 1.0)
print("\n   n   outage       independent outage")
for n in (1, 2, 4, 16, 64, 128):
    print(f"{n:4d}   {outage[n - 1]:.4e}   {an.independent_selection_outage(p, n, 1.0):.4e}")

# the same tail from simulation: P(first successful antenna index > k) = E[(1-q)^k]
cfg = mcsim.SimConfig.from_normalized(p, n_antennas=64, num_realizations=40_000, seed=3)
tail = mcsim.estimate_first_success_tail(cfg, 1.0, 64)
for n in (2, 16, 64):
    print(f"Monte Carlo outage n={n}: {tail[n].mean:.4e} +- {tail[n].std_error:.1e}"
          f"  (exact {outage[n - 1]:.4e})")

# very large orders are refused rather than silently losing precision
try:
    an.selection_combining_prob(p, an.MAX_SELECTION_ORDER + 1, 1.0)
except an.PrecisionExhaustedError as exc:
    print("\n", exc)
