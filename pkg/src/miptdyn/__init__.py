"""Stabilizer-circuit simulations of relaxation dynamics at the measurement-induced transition."""

__version__ = "0.1.0"

from .circuit import CircuitConfig, InitialState, run_trajectory  # noqa: E402
from .clifford import CliffordGate2, compose, inverse, sample_clifford2  # noqa: E402
from .ensemble import EnsembleSeries, EnsembleSpec, run_ensemble  # noqa: E402
from .entropy import Region, entanglement_entropy, half_chain_entropy  # noqa: E402
from .scaling import ScalingParams  # noqa: E402
from .tableau import StabilizerTableau, apply_clifford2, measure_z, new_product_state  # noqa: E402

__all__ = [
    "CircuitConfig", "InitialState", "run_trajectory",
    "CliffordGate2", "compose", "inverse", "sample_clifford2",
    "EnsembleSeries", "EnsembleSpec", "run_ensemble",
    "Region", "entanglement_entropy", "half_chain_entropy",
    "ScalingParams",
    "StabilizerTableau", "apply_clifford2", "measure_z", "new_product_state",
]
