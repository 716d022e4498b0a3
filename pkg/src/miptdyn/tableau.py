"""
Stabilizer tableau with destabilizers, bit-packed into 64-bit words.

The state of ``n`` qubits is held as ``2n`` signed Pauli rows: rows
``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers (Aaronson and
Gottesman, PRA 70, 052328).  Bits are packed qubit-major, 64 rows per word,
so a two-qubit gate touches ``4 * 2n/64`` words and a random-outcome Z
measurement at most ``n * 2n/64``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .clifford import CliffordGate2, gate_index, kernel_tables, validate_gate

WORD_BITS = 64


def n_words(n: int) -> int:
    return (n + WORD_BITS - 1) // WORD_BITS


@dataclass(frozen=True)
class PauliRow:
    """One signed Pauli string, unpacked (for inspection and fixtures)."""

    x_bits: np.ndarray
    z_bits: np.ndarray
    sign: int = 1

    def __post_init__(self):
        if len(self.x_bits) != len(self.z_bits):
            raise ValueError("x_bits and z_bits must have identical length")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    def __str__(self):
        chars = "IXZY"
        body = "".join(chars[int(a) | (int(b) << 1)] for a, b in zip(self.x_bits, self.z_bits))
        return ("+" if self.sign == 1 else "-") + body

    @classmethod
    def from_str(cls, s: str) -> "PauliRow":
        sign = 1
        if s[0] in "+-":
            sign = 1 if s[0] == "+" else -1
            s = s[1:]
        x = np.array([c in "XY" for c in s], dtype=np.uint8)
        z = np.array([c in "ZY" for c in s], dtype=np.uint8)
        if any(c not in "IXYZ" for c in s):
            raise ValueError(f"bad Pauli string {s!r}")
        return cls(x, z, sign)


class StabilizerTableau:
    """Pure stabilizer state on ``n`` qubits.

    Storage is qubit-major: ``x[q]`` / ``z[q]`` (``uint64[2*Wn]``) are the X / Z
    bits of qubit ``q`` across all rows, destabilizer words first, and ``r``
    holds the row signs in the same packing.  Kernels mutate these in place.
    """

    __slots__ = ("n", "x", "z", "r")

    def __init__(self, n: int, x: np.ndarray, z: np.ndarray, r: np.ndarray):
        self.n = n
        self.x = x
        self.z = z
        self.r = r

    @property
    def words(self) -> int:
        return self.x.shape[1] // 2

    @classmethod
    def product_state(cls, n: int) -> "StabilizerTableau":
        if n < 1:
            raise ValueError(f"need at least one qubit, got n={n}")
        w = n_words(n)
        x = np.zeros((n, 2 * w), dtype=np.uint64)
        z = np.zeros((n, 2 * w), dtype=np.uint64)
        for q in range(n):
            bit = np.uint64(1) << np.uint64(q % WORD_BITS)
            x[q, q // WORD_BITS] = bit
            z[q, w + q // WORD_BITS] = bit
        return cls(n, x, z, np.zeros(2 * w, dtype=np.uint64))

    @classmethod
    def from_bits(cls, x_rows: np.ndarray, z_rows: np.ndarray, signs: np.ndarray,
                  validate: bool = True) -> "StabilizerTableau":
        """Build from row-major 0/1 arrays of shape ``(2n, n)`` and ``2n`` sign bits."""
        x_rows = np.asarray(x_rows, dtype=np.uint8)
        z_rows = np.asarray(z_rows, dtype=np.uint8)
        n = x_rows.shape[1]
        if x_rows.shape != (2 * n, n) or z_rows.shape != x_rows.shape:
            raise ValueError("need 2n rows of n bits")
        t = cls(n, _pack_rows(x_rows), _pack_rows(z_rows),
                _pack_signs(np.asarray(signs, dtype=np.uint8)))
        if validate:
            t.validate()
        return t

    @classmethod
    def from_rows(cls, rows: list[PauliRow]) -> "StabilizerTableau":
        """Build from ``2n`` unpacked rows (destabilizers first)."""
        if len(rows) % 2 or not rows:
            raise ValueError("need 2n rows")
        n = len(rows) // 2
        for i, row in enumerate(rows):
            if len(row.x_bits) != n:
                raise ValueError(f"row {i} has length {len(row.x_bits)}, expected {n}")
        return cls.from_bits(np.array([r.x_bits for r in rows]), np.array([r.z_bits for r in rows]),
                             np.array([r.sign == -1 for r in rows]))

    def to_bits(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row-major ``(x, z, signs)`` as 0/1 ``uint8`` arrays, rows ``0..2n-1``."""
        return (_unpack_rows(self.x, self.n), _unpack_rows(self.z, self.n),
                _unpack_rows(self.r[None, :], self.n)[:, 0])

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, self.x.copy(), self.z.copy(), self.r.copy())

    def __eq__(self, other):
        if not isinstance(other, StabilizerTableau):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.x, other.x)
                and np.array_equal(self.z, other.z) and np.array_equal(self.r, other.r))

    def row(self, i: int) -> PauliRow:
        x, z, r = self.to_bits()
        return PauliRow(x[i], z[i], -1 if r[i] else 1)

    def stabilizers(self) -> list[PauliRow]:
        x, z, r = self.to_bits()
        return [PauliRow(x[i], z[i], -1 if r[i] else 1) for i in range(self.n, 2 * self.n)]

    def destabilizers(self) -> list[PauliRow]:
        x, z, r = self.to_bits()
        return [PauliRow(x[i], z[i], -1 if r[i] else 1) for i in range(self.n)]

    def to_text(self) -> str:
        """One signed Pauli string per line, destabilizers then stabilizers."""
        x, z, r = self.to_bits()
        return "".join(str(PauliRow(x[i], z[i], -1 if r[i] else 1)) + "\n" for i in range(2 * self.n))

    @classmethod
    def from_text(cls, text: str) -> "StabilizerTableau":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        return cls.from_rows([PauliRow.from_str(ln) for ln in lines])

    def symplectic_gram(self) -> np.ndarray:
        """``2n x 2n`` matrix of pairwise symplectic products (1 = anticommute)."""
        x, z, _ = self.to_bits()
        x = x.astype(np.int64)
        z = z.astype(np.int64)
        return (x @ z.T + z @ x.T) % 2

    def validate(self) -> None:
        """Raise ``ValueError`` unless the rows form a valid destabilizer/stabilizer tableau.

        The commutation pattern (stabilizers commute, destabilizer ``i``
        anticommutes only with stabilizer ``i``) makes the symplectic Gram
        matrix nonsingular, so it also implies full GF(2) rank.
        """
        n, w = self.n, n_words(self.n)
        if self.x.shape != (n, 2 * w) or self.z.shape != self.x.shape or self.r.shape != (2 * w,):
            raise ValueError("tableau arrays have the wrong shape")
        pad = n % WORD_BITS
        if pad:
            mask = ~((np.uint64(1) << np.uint64(pad)) - np.uint64(1))
            cols = [w - 1, 2 * w - 1]
            if (np.any(self.x[:, cols] & mask) or np.any(self.z[:, cols] & mask)
                    or np.any(self.r[cols] & mask)):
                raise ValueError("bits set in padding rows")
        gram = self.symplectic_gram()
        expected = np.zeros((2 * n, 2 * n), dtype=np.int64)
        idx = np.arange(n)
        expected[idx, idx + n] = 1
        expected[idx + n, idx] = 1
        bad = np.argwhere(gram != expected)
        if bad.size:
            i, j = bad[0]
            raise ValueError(f"rows {i} and {j} violate the tableau commutation pattern")

    def full_rank(self) -> bool:
        x, z, _ = self.to_bits()
        m = np.concatenate([x, z], axis=1)
        packed = _pack_bits(m)
        return K.gf2_rank_inplace(packed, 2 * self.n) == 2 * self.n

    def __repr__(self):
        return f"StabilizerTableau(n={self.n})"


def new_product_state(n: int) -> StabilizerTableau:
    """The ``|0...0>`` state: stabilizers ``+Z_i``, destabilizers ``+X_i``."""
    return StabilizerTableau.product_state(n)


def _check_site(state: StabilizerTableau, q: int) -> int:
    q = int(q)
    if not 0 <= q < state.n:
        raise IndexError(f"site {q} out of range for n={state.n}")
    return q


def apply_clifford2(state: StabilizerTableau, gate: CliffordGate2, sites) -> StabilizerTableau:
    """Conjugate the state by ``gate`` acting on ``sites = (a, b)`` (in place; returns ``state``)."""
    a, b = sites
    a = _check_site(state, a)
    b = _check_site(state, b)
    if a == b:
        raise ValueError(f"gate sites must differ, got ({a}, {b})")
    validate_gate(gate)
    lin, anf = kernel_tables()
    K.apply_gates(state.x, state.z, state.r,
                  np.array([a], dtype=np.int64), np.array([b], dtype=np.int64),
                  np.array([gate_index(gate)], dtype=np.int64), lin, anf)
    return state


def apply_gate_indices(state: StabilizerTableau, qa, qb, gids) -> StabilizerTableau:
    """Apply many gates given by table index; no validation (hot path)."""
    lin, anf = kernel_tables()
    K.apply_gates(state.x, state.z, state.r, qa, qb, gids, lin, anf)
    return state


def measure_z(state: StabilizerTableau, site: int, rng: np.random.Generator) -> int:
    """Projective Z measurement of ``site``; returns the outcome ``+1`` or ``-1``.

    One random bit is drawn from ``rng`` on every call (used only when the
    outcome is not determined), so stream consumption does not depend on the
    state.
    """
    site = _check_site(state, site)
    bit = int(rng.integers(2))
    code = K.measure_z(state.x, state.z, state.r, state.n, site, bit, True)
    return -1 if code & 1 else 1


def measure_z_detail(state: StabilizerTableau, site: int, random_bit: int) -> tuple[int, bool]:
    """Like :func:`measure_z` with an explicit coin; returns ``(outcome, was_random)``."""
    site = _check_site(state, site)
    code = K.measure_z(state.x, state.z, state.r, state.n, site, int(random_bit) & 1, True)
    return (-1 if code & 1 else 1), bool(code & K.MEAS_RANDOM)


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(rows, m)`` 0/1 array into ``uint64[rows, ceil(m/64)]``, little-endian bits."""
    bits = np.asarray(bits, dtype=np.uint8)
    rows, m = bits.shape
    w = n_words(m)
    padded = np.zeros((rows, w * WORD_BITS), dtype=np.uint8)
    padded[:, :m] = bits
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64)


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    """Row-major ``(2n, n)`` bits -> qubit-major ``(n, 2*Wn)`` words (also used for sign vectors)."""
    two_n = rows.shape[0]
    n = two_n // 2
    cols = rows.T
    return np.concatenate([_pack_bits(cols[:, :n]), _pack_bits(cols[:, n:])], axis=1)


def _pack_signs(signs: np.ndarray) -> np.ndarray:
    n = signs.shape[0] // 2
    return np.concatenate([_pack_bits(signs[None, :n])[0], _pack_bits(signs[None, n:])[0]])


def _unpack_rows(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`_pack_rows`; returns ``(2n, k)`` bits for ``k`` columns of words."""
    w = words.shape[1] // 2
    b = np.unpackbits(np.ascontiguousarray(words.astype("<u8")).view(np.uint8), axis=1,
                      bitorder="little")
    half = w * WORD_BITS
    return np.concatenate([b[:, :n], b[:, half:half + n]], axis=1).T.copy()
