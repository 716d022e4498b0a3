"""
Entanglement growth from a product state
========================================

Half-chain entropy S(t) for a few measurement rates.  Below the critical
rate the entropy keeps growing until the volume law caps it; at the
critical rate it grows like ln t; above it saturates quickly at an area-law
value.
"""

import numpy as np

from miptdyn import CircuitConfig, EnsembleSpec, run_ensemble
from miptdyn.scaling import fit_log_growth

L, n, t_max = 128, 60, 64
times = [1, 2, 4, 8, 16, 32, 64]

print(f"L={L}, {n} trajectories, S in bits")
print("p      " + "".join(f"t={t:<6d}" for t in times))
for p in (0.05, 0.10, 0.15995, 0.25, 0.40):
    s = run_ensemble(EnsembleSpec(CircuitConfig(L=L, p=p, t_max=t_max, seed=1), n))
    print(f"{p:<7.4f}" + "".join(f"{s.S_mean[t]:<8.2f}" for t in times))
    if p == 0.15995:
        crit = s

# at the critical rate S ~ delta ln t + c
f = fit_log_growth(crit, (4, 16))
print(f"\ncritical growth: delta = {f.value('delta'):.2f} +- {f.error('delta'):.2f} bits per e-fold of t")
print("local slopes dS/dln t:",
      np.round([(crit.S_mean[b] - crit.S_mean[a]) / np.log(b / a) for a, b in zip(times, times[1:])], 2))
