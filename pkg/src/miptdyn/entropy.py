"""Entanglement entropy of stabilizer states, in bits.

For a pure stabilizer state and region ``A``,
``S_A = rank(G|_A) - |A|`` where ``G|_A`` is the stabilizer generator
matrix restricted to the X and Z columns of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels as K
from .tableau import StabilizerTableau


@dataclass(frozen=True)
class Region:
    """Contiguous interval ``[start, start + size)`` on a ring of ``L`` sites."""

    start: int
    size: int
    L: int

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("ring must have at least one site")
        if not 0 < self.size < self.L:
            raise ValueError(f"region size must satisfy 0 < size < L, got size={self.size}, L={self.L}")
        object.__setattr__(self, "start", self.start % self.L)

    @classmethod
    def interval(cls, a: int, b: int, L: int) -> "Region":
        """Sites ``a, a+1, ..., b-1`` (mod L); ``b`` may be smaller than ``a`` to wrap."""
        return cls(a % L, (b - a) % L, L)

    def complement(self) -> "Region":
        return Region((self.start + self.size) % self.L, self.L - self.size, self.L)

    def sites(self) -> list[int]:
        return [(self.start + j) % self.L for j in range(self.size)]

    def __contains__(self, q: int) -> bool:
        return (q - self.start) % self.L < self.size


def entanglement_entropy(state: StabilizerTableau, region: Region) -> int:
    if region.L != state.n:
        raise ValueError(f"region lives on L={region.L} sites but state has n={state.n}")
    rank = K.region_rank(state.x, state.z, state.n, region.start, region.size)
    return int(rank) - region.size


def half_chain_entropy(state: StabilizerTableau) -> int:
    """Entropy of sites ``[0, L/2)``; with periodic boundaries the region has two cuts."""
    if state.n % 2:
        raise ValueError(f"half-chain entropy needs even L, got {state.n}")
    half = state.n // 2
    return int(K.region_rank(state.x, state.z, state.n, 0, half)) - half
