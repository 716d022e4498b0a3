"""Brute-force state-vector reference simulator (n <= ~10).

Qubit ``q`` is bit ``q`` of the basis index.  Gates are built as dense
unitaries from the generator images of a CliffordGate2, without using the
package's lookup tables or kernels.
"""

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def local_pauli(x: int, z: int) -> np.ndarray:
    # Hermitian convention: i^(xz) X^x Z^z, so (1,1) -> Y
    m = I2
    if x:
        m = m @ X
    if z:
        m = m @ Z
    return (1j ** (x * z)) * m


def two_qubit_pauli(sign_bit: int, v: int) -> np.ndarray:
    """Signed Pauli on two qubits from a 4-bit vector (x1, x2, z1, z2); qubit 1 is the low bit."""
    p1 = local_pauli(v & 1, (v >> 2) & 1)
    p2 = local_pauli((v >> 1) & 1, (v >> 3) & 1)
    return (-1) ** sign_bit * np.kron(p2, p1)


def gate_unitary(gate) -> np.ndarray:
    """4x4 unitary (up to global phase) whose conjugation action matches ``gate``."""
    imgs = []
    for k in range(4):
        s = (gate.phase_bits >> k) & 1
        col = gate.symplectic[:, k]
        v = int(col[0]) | int(col[1]) << 1 | int(col[2]) << 2 | int(col[3]) << 3
        imgs.append(two_qubit_pauli(s, v))
    gx1, gx2, gz1, gz2 = imgs
    proj = (np.eye(4) + gz1) @ (np.eye(4) + gz2) / 4
    # any column of the rank-1 projector works as U|00>
    col = np.argmax(np.linalg.norm(proj, axis=0))
    psi0 = proj[:, col] / np.linalg.norm(proj[:, col])
    u = np.empty((4, 4), dtype=complex)
    for idx in range(4):
        v = psi0
        if idx & 1:
            v = gx1 @ v
        if idx & 2:
            v = gx2 @ v
        u[:, idx] = v
    return u


class StateVector:
    def __init__(self, n: int):
        self.n = n
        self.psi = np.zeros(2**n, dtype=complex)
        self.psi[0] = 1.0

    def _tensor(self):
        # axis k of the tensor corresponds to qubit n-1-k
        return self.psi.reshape([2] * self.n)

    def apply2(self, u: np.ndarray, a: int, b: int) -> None:
        t = self._tensor()
        ax_a = self.n - 1 - a
        ax_b = self.n - 1 - b
        # u acts on index (x_a + 2 x_b): as tensor u[(b_out, a_out), (b_in, a_in)]
        u4 = u.reshape(2, 2, 2, 2)
        t = np.moveaxis(t, [ax_b, ax_a], [0, 1])
        shape = t.shape
        t = np.tensordot(u4, t, axes=([2, 3], [0, 1]))
        t = t.reshape(shape)
        t = np.moveaxis(t, [0, 1], [ax_b, ax_a])
        self.psi = t.reshape(-1)

    def prob_plus(self, q: int) -> float:
        """Born probability of outcome +1 for Z_q."""
        idx = np.arange(2**self.n)
        mask = ((idx >> q) & 1) == 0
        return float(np.sum(np.abs(self.psi[mask]) ** 2))

    def project(self, q: int, outcome: int) -> None:
        idx = np.arange(2**self.n)
        keep = ((idx >> q) & 1) == (0 if outcome == 1 else 1)
        self.psi = np.where(keep, self.psi, 0)
        norm = np.linalg.norm(self.psi)
        if norm < 1e-12:
            raise ValueError("projection onto zero-probability outcome")
        self.psi /= norm

    def entropy(self, sites) -> float:
        """Von Neumann entropy in bits of the reduced state on ``sites``."""
        sites = list(sites)
        rest = [q for q in range(self.n) if q not in sites]
        t = self._tensor()
        axes = [self.n - 1 - q for q in sites] + [self.n - 1 - q for q in rest]
        m = np.transpose(t, axes).reshape(2 ** len(sites), -1)
        sv = np.linalg.svd(m, compute_uv=False)
        lam = sv**2
        lam = lam[lam > 1e-12]
        return float(-np.sum(lam * np.log2(lam)))

    def expectation(self, op_full: np.ndarray) -> complex:
        return complex(np.vdot(self.psi, op_full @ self.psi))


def pauli_string_matrix(x_bits, z_bits, sign: int = 1) -> np.ndarray:
    """Dense operator for a signed Pauli string; qubit q is bit q of the index."""
    m = np.array([[1.0 + 0j]])
    for q in reversed(range(len(x_bits))):
        m = np.kron(m, local_pauli(int(x_bits[q]), int(z_bits[q])))
    return sign * m


def state_from_stabilizers(rows) -> np.ndarray:
    """Unique joint +1 eigenvector of commuting signed Pauli strings (PauliRow-like)."""
    n = len(rows[0].x_bits)
    proj = np.eye(2**n, dtype=complex)
    for row in rows:
        proj = proj @ (np.eye(2**n) + pauli_string_matrix(row.x_bits, row.z_bits, row.sign)) / 2
    col = np.argmax(np.linalg.norm(proj, axis=0))
    v = proj[:, col]
    return v / np.linalg.norm(v)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)
