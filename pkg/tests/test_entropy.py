import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from miptdyn.circuit import CircuitConfig, run_trajectory
from miptdyn.clifford import N_CLIFFORD, gate_from_index
from miptdyn.entropy import Region, entanglement_entropy, half_chain_entropy
from miptdyn.tableau import StabilizerTableau, apply_clifford2, measure_z, new_product_state

from statevector import StateVector, gate_unitary


def random_state(n, rng, depth=None, with_sv=True):
    t = new_product_state(n)
    sv = StateVector(n) if with_sv else None
    for _ in range(depth or 3 * n):
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        g = gate_from_index(int(rng.integers(N_CLIFFORD)))
        apply_clifford2(t, g, (a, b))
        if sv is not None:
            sv.apply2(gate_unitary(g), a, b)
    return t, sv


def test_product_state_has_zero_entropy():
    t = new_product_state(8)
    assert all(entanglement_entropy(t, Region(a, s, 8)) == 0 for a in range(8) for s in range(1, 8))


def test_ghz_four_qubits():
    ghz = StabilizerTableau.from_text("+ZIII\n+IXXX\n+IIXX\n+IIIX\n+XXXX\n+ZZII\n+IZZI\n+IIZZ\n")
    for a in range(4):
        for s in range(1, 4):
            assert entanglement_entropy(ghz, Region(a, s, 4)) == 1
    assert half_chain_entropy(ghz) == 1


def test_bell_pairs_across_cut():
    # pairs (0,2) and (1,3) each contribute one bit to [0,2)
    text = "+ZIII\n+IZII\n+IIXI\n+IIIX\n+XIXI\n+IXIX\n+ZIZI\n+IZIZ\n"
    t = StabilizerTableau.from_text(text)
    assert half_chain_entropy(t) == 2
    assert entanglement_entropy(t, Region(0, 1, 4)) == 1
    assert entanglement_entropy(t, Region(1, 2, 4)) == 2


def test_random_eight_qubit_states_match_dense_oracle():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        t, sv = random_state(8, rng, depth=int(rng.integers(1, 30)))
        # one random contiguous region per state keeps the runtime modest
        reg = Region(int(rng.integers(8)), int(rng.integers(1, 8)), 8)
        assert entanglement_entropy(t, reg) == pytest.approx(sv.entropy(reg.sites()), abs=1e-8)


def test_all_regions_match_oracle_few_states():
    rng = np.random.default_rng(81)
    for _ in range(10):
        t, sv = random_state(8, rng)
        for a in range(8):
            for s in range(1, 8):
                reg = Region(a, s, 8)
                assert entanglement_entropy(t, reg) == pytest.approx(sv.entropy(reg.sites()), abs=1e-8)


@given(st.integers(0, 2**32 - 1), st.integers(0, 19), st.integers(1, 19))
@settings(max_examples=100, deadline=None)
def test_complement_symmetry_and_bounds(seed, start, size):
    L = 20
    t, _ = random_state(L, np.random.default_rng(seed), with_sv=False)
    reg = Region(start, size, L)
    s = entanglement_entropy(t, reg)
    assert s == entanglement_entropy(t, reg.complement())
    assert 0 <= s <= min(size, L - size)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_adjacent_region_entropy_changes_by_at_most_one(seed):
    # adding one site changes S by at most one bit (subadditivity + Araki-Lieb)
    L = 16
    t, _ = random_state(L, np.random.default_rng(seed), with_sv=False)
    prev = 0
    for size in range(1, L):
        s = entanglement_entropy(t, Region(0, size, L))
        assert abs(s - prev) <= 1
        prev = s


@given(st.integers(0, 2**32 - 1), st.integers(1, 15))
@settings(max_examples=50, deadline=None)
def test_entropy_never_increases_under_measurement(seed, q):
    L = 16
    rng = np.random.default_rng(seed)
    t, _ = random_state(L, rng, with_sv=False)
    before = half_chain_entropy(t)
    measure_z(t, q, rng)
    assert half_chain_entropy(t) <= before


def test_unitary_brickwork_saturates_page_value():
    # at p = 0 the half chain approaches L/2 - O(1) bits
    res = run_trajectory(CircuitConfig(L=32, p=0.0, t_max=96, seed=1))
    assert res.S_series[-1] >= 16 - 2
    assert res.S_series.max() <= 16


def test_region_validation():
    with pytest.raises(ValueError):
        Region(0, 0, 8)
    with pytest.raises(ValueError):
        Region(0, 8, 8)
    t = new_product_state(6)
    with pytest.raises(ValueError):
        entanglement_entropy(t, Region(0, 2, 8))
    with pytest.raises(ValueError):
        half_chain_entropy(new_product_state(5))


def test_region_interval_wraps():
    r = Region.interval(6, 2, 8)
    assert r.sites() == [6, 7, 0, 1]
    assert 7 in r and 3 not in r
    assert r.complement().sites() == [2, 3, 4, 5]


@pytest.mark.parametrize("L", [64, 65, 130, 200])
def test_entropy_across_word_boundaries(L):
    rng = np.random.default_rng(L)
    t, _ = random_state(L, rng, depth=6 * L, with_sv=False)
    for start, size in [(0, L // 2), (60, 10), (L - 3, 7), (1, L - 1)]:
        reg = Region(start, size, L)
        assert entanglement_entropy(t, reg) == entanglement_entropy(t, reg.complement())
