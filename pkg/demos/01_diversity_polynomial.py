"""
The diversity polynomial and diversity loss
============================================

D_n(x) = prod_{i<n} (1 + x/i) carries all of the interference correlation
between n antennas.  This script prints its exact coefficients, checks the
two power-law bounds and shows how the diversity loss n / D_n(delta) grows.
"""

import numpy as np

from simocorr.analytic import diversity_loss
from simocorr.specfun import (
    diversity_poly,
    diversity_poly_bounds,
    diversity_poly_coefficients,
    diversity_poly_range,
    log_gamma,
)

# exact rational coefficients, lowest degree first
for n in range(1, 6):
    coeffs = diversity_poly_coefficients(n)
    print(f"D_{n}(x):", " + ".join(f"{c}*x^{k}" for k, c in enumerate(coeffs)))

# D_n(x) sits between n^x and n^x / Gamma(1+x), and under the chord 1 + (n-1)x
x = 0.5
print("\n  n      n^x        D_n(x)    n^x/G(1+x)   chord")
for n in (2, 8, 64, 1000):
    lo, up, chord = diversity_poly_bounds(n, x)
    print(f"{n:4d} {lo:10.5f} {diversity_poly(n, x):10.5f} {up:10.5f} {chord:10.1f}")

# a whole sequence at once, cheap even for very long ranges
d = diversity_poly_range(10 ** 6, x)
print("\nD_n(1/2) at n = 10, 10^3, 10^6:", d[9], d[999], d[-1])

# diversity loss grows like Gamma(1+delta) n^(1-delta): no finite ceiling
for delta in (0.25, 0.5, 0.75):
    ratios = [diversity_loss(n, delta) / n ** (1 - delta) for n in (10, 1000, 10 ** 6)]
    print(f"delta={delta}: L(n)/n^(1-delta) =", np.round(ratios, 5),
          "-> Gamma(1+delta) =", round(float(np.exp(log_gamma(1 + delta))), 5))
