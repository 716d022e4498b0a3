"""
Brick-wall hybrid circuit: random two-site Cliffords on a ring with
probabilistic single-site Z measurements.

Conventions (all echoed into ensemble metadata):

* sites ``0..L-1``; the *odd* sublayer acts on ``(1,2), (3,4), ..., (L-1,0)``,
  the *even* sublayer on ``(0,1), (2,3), ..., (L-2,L-1)``;
* one time unit = odd sublayer then even sublayer; with
  ``measurement_layers_per_unit=2`` each sublayer is followed by a
  measurement layer, with ``1`` only the even sublayer is;
* the half-chain entropy is recorded once per time unit, after the even
  sublayer and its measurements; ``t = 0`` is the prepared state.

Randomness comes from one Philox stream per trajectory, keyed by
``(seed, trajectory_index)``.  Per sublayer the stream is consumed in a fixed
order: ``L/2`` gate indices, then (if a measurement layer follows) ``L``
uniform coins and ``L`` outcome bits.  Consumption never depends on the
state, so trajectories are bit-reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .clifford import N_CLIFFORD, kernel_tables
from .entropy import half_chain_entropy
from .tableau import StabilizerTableau, new_product_state

ODD = 1
EVEN = 0


class InitialState(str, enum.Enum):
    PRODUCT = "product"
    VOLUME_LAW = "volume"

    @classmethod
    def parse(cls, value) -> "InitialState":
        if isinstance(value, cls):
            return value
        aliases = {"product": cls.PRODUCT, "productstate": cls.PRODUCT,
                   "volume": cls.VOLUME_LAW, "volumelaw": cls.VOLUME_LAW,
                   "volumelawsteadystate": cls.VOLUME_LAW}
        key = str(value).replace("_", "").replace("-", "").lower()
        if key not in aliases:
            raise ValueError(f"unknown initial_state {value!r}")
        return aliases[key]


class ConfigError(ValueError):
    """Invalid experiment parameter; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class CircuitConfig:
    L: int
    p: float
    initial_state: InitialState = InitialState.PRODUCT
    t_max: int = 100
    prep_time: int | None = None
    seed: int = 0
    trajectory_index: int = 0
    measurement_layers_per_unit: int = 2

    def __post_init__(self):
        object.__setattr__(self, "initial_state", InitialState.parse(self.initial_state))
        if self.prep_time is None:
            object.__setattr__(self, "prep_time", 4 * int(self.L))
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.L, (int, np.integer)) or self.L < 4 or self.L % 2:
            raise ConfigError("L", f"must be an even integer >= 4, got {self.L!r}")
        if not 0.0 <= float(self.p) <= 1.0:
            raise ConfigError("p", f"must lie in [0, 1], got {self.p!r}")
        if self.t_max < 1:
            raise ConfigError("t_max", f"must be >= 1, got {self.t_max!r}")
        if self.initial_state is InitialState.VOLUME_LAW and self.prep_time < 1:
            raise ConfigError("prep_time", f"must be >= 1 for volume-law preparation, got {self.prep_time!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.trajectory_index < 0:
            raise ConfigError("trajectory_index", "must be non-negative")
        if self.measurement_layers_per_unit not in (1, 2):
            raise ConfigError("measurement_layers_per_unit", "must be 1 or 2")

    def with_trajectory(self, index: int) -> "CircuitConfig":
        return replace(self, trajectory_index=index)


@dataclass
class StepRecord:
    """What one sublayer did; ``codes[q]`` is -1 for unmeasured sites, else a kernel code."""

    parity: int
    qa: np.ndarray
    qb: np.ndarray
    gate_ids: np.ndarray
    codes: np.ndarray | None = None

    @property
    def n_measured(self) -> int:
        return 0 if self.codes is None else int(np.count_nonzero(self.codes >= 0))


@dataclass
class TrajectoryResult:
    config: CircuitConfig
    S_series: np.ndarray
    measurement_count: int
    records: list[StepRecord] | None = field(default=None, repr=False)


def trajectory_rng(seed: int, trajectory_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trajectory_index),))
    return np.random.Generator(np.random.Philox(ss))


_PAIRS: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def layer_pairs(L: int, parity: int) -> tuple[np.ndarray, np.ndarray]:
    key = (L, parity)
    if key not in _PAIRS:
        left = np.arange(1 if parity == ODD else 0, L, 2, dtype=np.int64)
        _PAIRS[key] = (left, (left + 1) % L)
    return _PAIRS[key]


def step(state: StabilizerTableau, p: float, rng: np.random.Generator, layer_parity: int,
         measure: bool = True, want_outcomes: bool = False) -> StepRecord:
    """One unitary sublayer followed (if ``measure``) by one measurement layer."""
    L = state.n
    qa, qb = layer_pairs(L, layer_parity)
    gids = rng.integers(0, N_CLIFFORD, size=qa.shape[0], dtype=np.int64)
    lin, anf = kernel_tables()
    K.apply_gates(state.x, state.z, state.r, qa, qb, gids, lin, anf)
    rec = StepRecord(layer_parity, qa, qb, gids)
    if measure:
        coins = rng.random(L)
        bits = rng.integers(0, 2, size=L, dtype=np.uint8)
        mask = (coins < p).view(np.uint8)
        codes = np.empty(L, dtype=np.int64)
        K.measure_sites(state.x, state.z, state.r, L, mask, bits, want_outcomes, codes)
        rec.codes = codes
    return rec


def time_unit(state: StabilizerTableau, p: float, rng: np.random.Generator,
              measurement_layers_per_unit: int = 2, want_outcomes: bool = False) -> list[StepRecord]:
    both = measurement_layers_per_unit == 2
    return [step(state, p, rng, ODD, measure=both, want_outcomes=want_outcomes),
            step(state, p, rng, EVEN, measure=True, want_outcomes=want_outcomes)]


def prepare_initial(config: CircuitConfig, rng: np.random.Generator | None = None) -> StabilizerTableau:
    """Product state, or the product state run for ``prep_time`` units of measurement-free brick-wall."""
    if rng is None:
        rng = trajectory_rng(config.seed, config.trajectory_index)
    state = new_product_state(config.L)
    if config.initial_state is InitialState.VOLUME_LAW:
        for _ in range(config.prep_time):
            step(state, 0.0, rng, ODD, measure=False)
            step(state, 0.0, rng, EVEN, measure=False)
    return state


def run_trajectory(config: CircuitConfig, keep_records: bool = False) -> TrajectoryResult:
    rng = trajectory_rng(config.seed, config.trajectory_index)
    state = prepare_initial(config, rng)
    S = np.empty(config.t_max + 1, dtype=np.int64)
    S[0] = half_chain_entropy(state)
    count = 0
    records = [] if keep_records else None
    for t in range(1, config.t_max + 1):
        recs = time_unit(state, config.p, rng, config.measurement_layers_per_unit,
                         want_outcomes=keep_records)
        count += sum(r.n_measured for r in recs)
        if keep_records:
            records.extend(recs)
        S[t] = half_chain_entropy(state)
    return TrajectoryResult(config, S, count, records)
