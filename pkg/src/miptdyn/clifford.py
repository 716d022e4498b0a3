"""
Two-qubit Clifford gates in the binary symplectic picture.

A gate is stored as a 4x4 matrix ``S`` over GF(2) acting on column vectors
``(x1, x2, z1, z2)`` plus four sign bits, one per generator image
(X1, X2, Z1, Z2).  Column ``k`` of ``S`` is the symplectic vector of the
image of generator ``k``.

Pauli vectors are also used as 4-bit integers with
bit0 = x1, bit1 = x2, bit2 = z1, bit3 = z2.  The Hermitian Pauli with vector
``v`` is ``prod_j i^(x_j z_j) X_j^(x_j) Z_j^(z_j)`` (so ``Y = iXZ``).

Sampling is exactly uniform over Sp(4, 2) x {signs}, i.e. over the
11520 two-qubit Cliffords modulo global phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

N_SYMPLECTIC = 720
N_SIGNS = 16
N_CLIFFORD = N_SYMPLECTIC * N_SIGNS

LAMBDA = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [1, 0, 0, 0],
     [0, 1, 0, 0]], dtype=np.uint8)


def vec_to_int(v) -> int:
    return int(v[0]) | (int(v[1]) << 1) | (int(v[2]) << 2) | (int(v[3]) << 3)


def int_to_vec(k: int) -> np.ndarray:
    return np.array([(k >> j) & 1 for j in range(4)], dtype=np.uint8)


def symplectic_product(u: int, v: int) -> int:
    """Symplectic inner product of two 4-bit Pauli vectors (0 = commute)."""
    ux, uz = u & 3, (u >> 2) & 3
    vx, vz = v & 3, (v >> 2) & 3
    return bin((ux & vz) ^ (uz & vx)).count("1") & 1


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    # exponent of i in (single-qubit Pauli 1) * (single-qubit Pauli 2)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


def pauli_mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    """Multiply ``i^ka P(u)`` by ``i^kb P(v)``; arguments are ``(k, v)`` pairs."""
    ka, u = a
    kb, v = b
    k = ka + kb
    for q in range(2):
        k += _g((u >> q) & 1, (u >> (q + 2)) & 1, (v >> q) & 1, (v >> (q + 2)) & 1)
    return k % 4, u ^ v


@dataclass(frozen=True, eq=False)
class CliffordGate2:
    symplectic: np.ndarray
    phase_bits: int = 0

    def __post_init__(self):
        s = np.asarray(self.symplectic, dtype=np.uint8) & 1
        if s.shape != (4, 4):
            raise ValueError(f"symplectic part must be 4x4, got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "symplectic", s)
        if not 0 <= int(self.phase_bits) < 16:
            raise ValueError("phase_bits must be a 4-bit integer")
        object.__setattr__(self, "phase_bits", int(self.phase_bits))

    def __eq__(self, other):
        if not isinstance(other, CliffordGate2):
            return NotImplemented
        return (self.phase_bits == other.phase_bits
                and np.array_equal(self.symplectic, other.symplectic))

    def __hash__(self):
        return hash((self.symplectic.tobytes(), self.phase_bits))

    def __repr__(self):
        rows = ["".join(str(b) for b in row) for row in self.symplectic]
        return f"CliffordGate2({'/'.join(rows)}, phase_bits={self.phase_bits:04b})"

    def is_symplectic(self) -> bool:
        return is_symplectic(self.symplectic)

    def generator_image(self, k: int) -> tuple[int, int]:
        """Signed image of generator ``k`` (0..3 = X1, X2, Z1, Z2) as ``(sign_bit, vector)``."""
        return (self.phase_bits >> k) & 1, vec_to_int(self.symplectic[:, k])

    def lookup_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Image vector and sign bit for every one of the 16 local Paulis."""
        image = np.empty(16, dtype=np.uint8)
        sign = np.empty(16, dtype=np.uint8)
        for v in range(16):
            image[v], sign[v] = self.conjugate(v)
        return image, sign

    def conjugate(self, v: int) -> tuple[int, int]:
        """Return ``(image_vector, sign_bit)`` with ``U P(v) U^dag = (-1)^sign P(image)``."""
        x1, x2, z1, z2 = (v >> 0) & 1, (v >> 1) & 1, (v >> 2) & 1, (v >> 3) & 1
        acc = ((x1 & z1) + (x2 & z2), 0)
        # P(v) = i^(x1 z1 + x2 z2) X1^x1 Z1^z1 X2^x2 Z2^z2
        for k, e in ((0, x1), (2, z1), (1, x2), (3, z2)):
            if e:
                s, w = self.generator_image(k)
                acc = pauli_mul(acc, (2 * s, w))
        k, w = acc
        if k % 2:
            raise ValueError("gate does not map Hermitian Paulis to Hermitian Paulis")
        return w, k // 2


def is_symplectic(s: np.ndarray) -> bool:
    s = np.asarray(s, dtype=np.int64)
    if s.shape != (4, 4):
        return False
    return bool(np.array_equal((s.T @ LAMBDA @ s) % 2, LAMBDA))


def gf2_det_nonzero(s: np.ndarray) -> bool:
    """Invertibility over GF(2), checked by elimination (independent of the symplectic test)."""
    m = (np.asarray(s, dtype=np.uint8) & 1).copy()
    n = m.shape[0]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r, c]), None)
        if piv is None:
            return False
        m[[c, piv]] = m[[piv, c]]
        for r in range(n):
            if r != c and m[r, c]:
                m[r] ^= m[c]
    return True


def identity_gate() -> CliffordGate2:
    return CliffordGate2(np.eye(4, dtype=np.uint8), 0)


def _omega_vec(u: int, v: int) -> int:
    return symplectic_product(u, v)


@lru_cache(maxsize=None)
def _symplectic_table() -> np.ndarray:
    mats = np.empty((N_SYMPLECTIC, 4, 4), dtype=np.uint8)
    for idx in range(N_SYMPLECTIC):
        mats[idx] = _symplectic_from_index_uncached(idx)
    mats.setflags(write=False)
    return mats


def _symplectic_from_index_uncached(idx: int) -> np.ndarray:
    i1, rest = divmod(idx, 48)
    i2, i3 = divmod(rest, 6)
    a = 1 + i1
    partners = [b for b in range(1, 16) if _omega_vec(a, b) == 1]
    b = partners[i2]
    complement = [w for w in range(1, 16) if _omega_vec(w, a) == 0 and _omega_vec(w, b) == 0]
    c_idx, d_idx = divmod(i3, 2)
    c = complement[c_idx]
    d = [w for w in complement if w != c][d_idx]
    s = np.empty((4, 4), dtype=np.uint8)
    for col, w in enumerate((a, c, b, d)):  # images of X1, X2, Z1, Z2
        s[:, col] = int_to_vec(w)
    return s


def symplectic_from_index(idx: int) -> np.ndarray:
    """Canonical symplectic matrix for ``idx`` in ``[0, 720)``.

    ``idx = 48*i1 + 6*i2 + i3``: ``i1`` picks the X1 image among the 15
    nonidentity Paulis, ``i2`` the Z1 image among the 8 anticommuting with it,
    ``i3`` one of the 6 ordered symplectic pairs spanning the complement.
    """
    if not 0 <= idx < N_SYMPLECTIC:
        raise ValueError(f"symplectic index {idx} out of range")
    return _symplectic_table()[idx].copy()


def gate_from_index(index: int) -> CliffordGate2:
    """Gate number ``index`` in ``[0, 11520)``: ``16 * symplectic_index + phase_bits``."""
    if not 0 <= index < N_CLIFFORD:
        raise ValueError(f"gate index {index} out of range")
    sidx, ph = divmod(index, N_SIGNS)
    return CliffordGate2(_symplectic_table()[sidx], ph)


def sample_clifford2(rng: np.random.Generator) -> CliffordGate2:
    """Uniformly random two-qubit Clifford (modulo global phase)."""
    return gate_from_index(int(rng.integers(N_CLIFFORD)))


def sample_gate_indices(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.integers(0, N_CLIFFORD, size=size, dtype=np.int64)


def compose(g1: CliffordGate2, g2: CliffordGate2) -> CliffordGate2:
    """Gate equivalent to applying ``g1`` first, then ``g2``."""
    s = (g2.symplectic.astype(np.int64) @ g1.symplectic.astype(np.int64)) % 2
    bits = 0
    for k in range(4):
        s1, w = g1.generator_image(k)
        _, s2 = g2.conjugate(w)
        bits |= (s1 ^ s2) << k
    return CliffordGate2(s, bits)


def inverse(g: CliffordGate2) -> CliffordGate2:
    s = g.symplectic.astype(np.int64)
    s_inv = (LAMBDA @ s.T @ LAMBDA) % 2
    bits = 0
    for k in range(4):
        w = vec_to_int(s_inv[:, k])
        _, sign = g.conjugate(w)
        bits |= sign << k
    return CliffordGate2(s_inv, bits)


def validate_gate(g: CliffordGate2) -> None:
    if not is_symplectic(g.symplectic) or not gf2_det_nonzero(g.symplectic):
        raise ValueError(f"not a valid two-qubit Clifford: {g!r}")


@lru_cache(maxsize=None)
def gate_tables() -> tuple[np.ndarray, np.ndarray]:
    """Lookup tables for all 11520 gates, indexed ``[gate_index, local_pauli]``.

    Flipping the sign of generator ``k`` flips the sign of every image whose
    preimage contains generator ``k``, so only the 720 sign-free tables are
    built by Pauli multiplication.
    """
    image = np.empty((N_CLIFFORD, 16), dtype=np.uint8)
    sign = np.empty((N_CLIFFORD, 16), dtype=np.uint8)
    v = np.arange(16)
    parity = np.array([[bin(ph & vv).count("1") & 1 for vv in v] for ph in range(16)],
                      dtype=np.uint8)
    for sidx in range(N_SYMPLECTIC):
        img0, sgn0 = CliffordGate2(_symplectic_table()[sidx], 0).lookup_tables()
        rows = slice(sidx * N_SIGNS, (sidx + 1) * N_SIGNS)
        image[rows] = img0
        sign[rows] = sgn0[None, :] ^ parity
    image.setflags(write=False)
    sign.setflags(write=False)
    return image, sign


def gate_index(g: CliffordGate2) -> int:
    """Inverse of :func:`gate_from_index`."""
    key = g.symplectic.tobytes()
    return _symplectic_lookup()[key] * N_SIGNS + g.phase_bits


@lru_cache(maxsize=None)
def _symplectic_lookup() -> dict[bytes, int]:
    return {m.tobytes(): i for i, m in enumerate(_symplectic_table())}


@lru_cache(maxsize=None)
def kernel_tables() -> tuple[np.ndarray, np.ndarray]:
    """Per-gate 16-bit masks used by the word-parallel gate kernel.

    ``lin[g]`` bit ``4*i + j`` is entry ``(i, j)`` of the symplectic matrix;
    ``anf[g]`` bit ``m`` is the coefficient of monomial ``m`` (a subset of the
    four input coordinates) in the algebraic normal form of the sign function.
    """
    image, sign = gate_tables()
    lin = np.zeros(N_CLIFFORD, dtype=np.int64)
    for j in range(4):
        col = image[:, 1 << j].astype(np.int64)
        for i in range(4):
            lin |= ((col >> i) & 1) << (4 * i + j)
    coef = sign.astype(np.int64).copy()
    for i in range(4):
        for v in range(16):
            if (v >> i) & 1:
                coef[:, v] ^= coef[:, v ^ (1 << i)]
    anf = (coef << np.arange(16)).sum(axis=1).astype(np.int64)
    lin.setflags(write=False)
    anf.setflags(write=False)
    return lin, anf
