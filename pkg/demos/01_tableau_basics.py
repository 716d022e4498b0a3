"""
Stabilizer tableaux by hand
===========================

Build a Bell pair and a GHZ state from random two-qubit Cliffords, read off
their stabilizers, and measure them.
"""

import numpy as np

from miptdyn.clifford import N_CLIFFORD, gate_from_index
from miptdyn.entropy import Region, entanglement_entropy
from miptdyn.tableau import StabilizerTableau, apply_clifford2, measure_z, new_product_state

# |00> is stabilized by +ZI and +IZ; the destabilizers are +XI and +IX
state = new_product_state(2)
print(state.to_text())

# search the 11520 gates for one that turns |00> into a Bell pair
for gid in range(N_CLIFFORD):
    cand = apply_clifford2(new_product_state(2), gate_from_index(gid), (0, 1))
    if sorted(str(r) for r in cand.stabilizers()) == ["+XX", "+ZZ"]:
        break
print(f"gate {gid} makes a Bell pair:")
print(cand.to_text())

# the two outcomes are perfectly correlated and individually random
rng = np.random.default_rng(0)
pairs = []
for _ in range(8):
    s = cand.copy()
    pairs.append((measure_z(s, 0, rng), measure_z(s, 1, rng)))
print("outcomes:", pairs)

# a GHZ state written out directly; every cut carries one bit
ghz = StabilizerTableau.from_text("+ZIII\n+IXXX\n+IIXX\n+IIIX\n+XXXX\n+ZZII\n+IZZI\n+IIZZ\n")
for size in (1, 2, 3):
    print(f"S([0,{size})) = {entanglement_entropy(ghz, Region(0, size, 4))} bit")
