import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from miptdyn.clifford import (
    LAMBDA, N_CLIFFORD, N_SYMPLECTIC, CliffordGate2, compose, gate_from_index, gate_index,
    gate_tables, gf2_det_nonzero, identity_gate, inverse, is_symplectic, kernel_tables,
    sample_clifford2, symplectic_from_index, symplectic_product,
)

from statevector import gate_unitary, two_qubit_pauli, fidelity

gate_ids = st.integers(min_value=0, max_value=N_CLIFFORD - 1)


def brute_force_symplectic_count():
    count = 0
    lam = LAMBDA.astype(np.int64)
    for bits in range(1 << 16):
        m = np.array([(bits >> k) & 1 for k in range(16)], dtype=np.int64).reshape(4, 4)
        if np.array_equal((m.T @ lam @ m) % 2, lam):
            count += 1
    return count


def test_sp42_order_by_brute_force():
    assert brute_force_symplectic_count() == 720


def test_canonical_index_space_covers_group():
    mats = {symplectic_from_index(i).tobytes() for i in range(N_SYMPLECTIC)}
    assert len(mats) == 720
    classes = {gate_from_index(i) for i in range(N_CLIFFORD)}
    assert len(classes) == 11520


def test_every_canonical_matrix_is_symplectic_and_invertible():
    for i in range(N_SYMPLECTIC):
        s = symplectic_from_index(i)
        assert is_symplectic(s)
        assert gf2_det_nonzero(s)


def test_non_symplectic_rejected():
    bad = np.eye(4, dtype=np.uint8)
    bad[0, 2] = 1
    bad[1, 2] = 1
    assert not is_symplectic(bad)


def test_sampled_gates_are_symplectic():
    rng = np.random.default_rng(3)
    for _ in range(500):
        assert sample_clifford2(rng).is_symplectic()


def test_chi_square_uniform_over_symplectic_classes():
    rng = np.random.default_rng(20240611)
    idx = rng.integers(0, N_CLIFFORD, size=200_000) // 16
    counts = np.bincount(idx, minlength=N_SYMPLECTIC)
    assert chisquare(counts).pvalue > 0.01


def test_x1_image_uniform_over_nonidentity_paulis():
    rng = np.random.default_rng(11)
    images = [gate_from_index(int(g)).generator_image(0)[1]
              for g in rng.integers(0, N_CLIFFORD, size=30_000)]
    counts = np.bincount(images, minlength=16)
    assert counts[0] == 0
    assert chisquare(counts[1:]).pvalue > 0.01


def test_gate_index_round_trip():
    for i in range(0, N_CLIFFORD, 37):
        assert gate_index(gate_from_index(i)) == i


@given(gate_ids)
@settings(max_examples=200, deadline=None)
def test_lookup_tables_match_unitary_conjugation(gid):
    g = gate_from_index(gid)
    u = gate_unitary(g)
    image, sign = gate_tables()
    for v in range(16):
        lhs = u @ two_qubit_pauli(0, v) @ u.conj().T
        assert np.allclose(lhs, two_qubit_pauli(int(sign[gid, v]), int(image[gid, v])))


@given(gate_ids, gate_ids)
@settings(max_examples=100, deadline=None)
def test_compose_matches_unitary_product(a, b):
    g1, g2 = gate_from_index(a), gate_from_index(b)
    g = compose(g1, g2)
    assert g.is_symplectic()
    u = gate_unitary(g2) @ gate_unitary(g1)
    uc = gate_unitary(g)
    # equal up to a global phase
    overlap = np.trace(uc.conj().T @ u)
    assert abs(abs(overlap) - 4) < 1e-9


def test_compose_on_all_two_qubit_stabilizer_states():
    # the 60 two-qubit stabilizer states, generated by Cliffords acting on |00>
    rng = np.random.default_rng(5)
    zero = np.zeros(4, dtype=complex)
    zero[0] = 1
    states = []
    for gid in range(0, N_CLIFFORD, 7):
        v = gate_unitary(gate_from_index(gid)) @ zero
        if all(fidelity(v, w) < 1 - 1e-9 for w in states):
            states.append(v)
    assert len(states) == 60
    for _ in range(40):
        g1, g2 = sample_clifford2(rng), sample_clifford2(rng)
        uc = gate_unitary(compose(g1, g2))
        u = gate_unitary(g2) @ gate_unitary(g1)
        for psi in states:
            assert fidelity(uc @ psi, u @ psi) == pytest.approx(1.0, abs=1e-9)


@given(gate_ids)
@settings(max_examples=100, deadline=None)
def test_identity_and_inverse_laws(gid):
    g = gate_from_index(gid)
    assert compose(g, identity_gate()) == g
    assert compose(identity_gate(), g) == g
    assert compose(g, inverse(g)) == identity_gate()
    assert compose(inverse(g), g) == identity_gate()


def test_identity_tables_are_trivial():
    g = identity_gate()
    image, sign = g.lookup_tables()
    assert list(image) == list(range(16))
    assert not sign.any()


def test_symplectic_product_pairs():
    # X1=1, Z1=4 anticommute; X1 and Z2=8 commute
    assert symplectic_product(1, 4) == 1
    assert symplectic_product(1, 8) == 0
    assert all(symplectic_product(v, v) == 0 for v in range(16))


def test_kernel_tables_agree_with_lookup():
    lin, anf = kernel_tables()
    image, sign = gate_tables()
    for gid in range(0, N_CLIFFORD, 101):
        for v in range(16):
            out = 0
            for i in range(4):
                bit = 0
                for j in range(4):
                    bit ^= ((lin[gid] >> (4 * i + j)) & 1) & ((v >> j) & 1)
                out |= bit << i
            assert out == image[gid, v]
            s = 0
            for m in range(16):
                if (anf[gid] >> m) & 1 and (v & m) == m:
                    s ^= 1
            assert s == sign[gid, v]


def test_bad_phase_bits_rejected():
    with pytest.raises(ValueError):
        CliffordGate2(np.eye(4), 16)
    with pytest.raises(ValueError):
        CliffordGate2(np.eye(3), 0)


@pytest.mark.parametrize("k", range(4))
def test_phase_bit_flips_generator_sign(k):
    g = CliffordGate2(np.eye(4), 1 << k)
    for j in range(4):
        s, w = g.generator_image(j)
        assert w == 1 << j
        assert s == (1 if j == k else 0)
    assert list(itertools.islice((g.conjugate(1 << k)[1] for _ in range(1)), 1)) == [1]
