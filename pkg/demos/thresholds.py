"""Exponent thresholds of the mu and q variants on the rho2 family.

A coarse x grid keeps this under a minute; the acceptance test uses the
fine grid (step 0.05 on [-10, 10]).

Run: python3 demos/thresholds.py
"""
import numpy as np

from strongmono import family_rho2, residual, threshold_scan
from strongmono.convex_roof import FAST_OPTIONS
from strongmono.monogamy import VariantSpec

xs = np.round(np.arange(-10, 10.001, 0.5), 2)
grid = np.round(np.arange(1, 4.001, 0.01), 2)

mu = threshold_scan(family_rho2, "mu", grid, xs)
print(f"mu threshold: {mu:.2f}")
q = threshold_scan(family_rho2, "q", grid, xs, screen=FAST_OPTIONS)
print(f"q threshold (lower-bound residuals): {q:.2f}")

print("\nnatural residual along x")
for x in (-100, -10, -1, -0.3, 0, 0.3, 1, 10, 100):
    print(f"  x = {x:>6}: {residual(family_rho2(x)).residual:+.3e}  "
          f"mu=3: {residual(family_rho2(x), 1, VariantSpec('mu', 3)).residual:+.3e}")
