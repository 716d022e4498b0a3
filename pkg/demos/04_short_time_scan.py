"""
Locating the transition from short runs
=======================================

From a product state, S plotted against ln t bends upward below the
critical rate and downward above it.  A quadratic fit in ln t over a short
window is enough to bracket p_c without waiting for steady states.
"""

from miptdyn import CircuitConfig, EnsembleSpec, run_ensemble
from miptdyn.scaling import critical_scan

L, n, t_max = 128, 150, 64
grid = (0.10, 0.13, 0.16, 0.19, 0.22)
series = [run_ensemble(EnsembleSpec(CircuitConfig(L=L, p=p, t_max=t_max, seed=4), n)) for p in grid]
res = critical_scan(series, (4, t_max))
for e in res.entries:
    print(f"p={e.p:.2f}  {e.classification:<9s} curvature {e.curvature:+.4f} ({e.significance:.1f} sigma)")
print("bracket:", res.bracket, "-", res.message)
