"""The most violating member of the rho1 family and where its minimum sits.

Run: python3 demos/minimum_violation.py
"""
import numpy as np

from strongmono import A0, family_rho1, residual
from strongmono.harness import minimize_residual

rep = residual(family_rho1(A0, 0.0))
print(f"residual at a = 5/(6 sqrt 2), x = 0: {rep.residual:.8f} (exact: {rep.exact})")
for key, rv in rep.three_tangles.items():
    print(f"  three-tangle roof on qubits {key}: {rv.value:.10f}")

print("\nresidual along a at x = 0")
for a in np.linspace(0.55, 0.63, 9):
    print(f"  a = {a:.3f}: {residual(family_rho1(a, 0.0)).residual:+.8f}")

params, value = minimize_residual(start=(0.6, 0.1))
print(f"\nNelder-Mead from (0.6, 0.1): a* = {params['a']:.6f}, x* = {params['x']:.1e}, "
      f"residual {value:.8f}")
