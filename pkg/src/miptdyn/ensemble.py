"""Trajectory ensembles: run, aggregate, persist.

Aggregation keeps exact integer sums of ``S`` and ``S**2`` per time step, so
the result does not depend on execution order or on the number of workers.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import CircuitConfig, InitialState, run_trajectory

log = logging.getLogger(__name__)

CONVENTIONS = {
    "odd_sublayer": "(1,2),(3,4),...,(L-1,0)",
    "even_sublayer": "(0,1),(2,3),...,(L-2,L-1)",
    "sublayer_order": "odd,even",
    "entropy_units": "bits",
    "entropy_region": "[0,L/2)",
    "rng": "Philox(SeedSequence(seed, spawn_key=(trajectory_index,)))",
}


class TrajectoryError(RuntimeError):
    def __init__(self, index: int, seed: int, cause: BaseException):
        super().__init__(f"trajectory {index} (seed={seed}) failed: {cause!r}")
        self.index = index
        self.seed = seed


@dataclass(frozen=True)
class EnsembleSpec:
    base: CircuitConfig
    n_trajectories: int
    workers: int = 1

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError(f"n_trajectories must be >= 1, got {self.n_trajectories}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class EnsembleSeries:
    L: int
    p: float
    initial_state: InitialState
    t: np.ndarray
    S_mean: np.ndarray
    S_stderr: np.ndarray
    n_trajectories: int
    seed: int
    version: str = __version__
    conventions: dict = field(default_factory=dict)

    @property
    def filename(self) -> str:
        return series_filename(self.L, self.p, self.initial_state, self.n_trajectories)

    def window(self, t_lo: float, t_hi: float) -> "EnsembleSeries":
        keep = (self.t >= t_lo) & (self.t <= t_hi)
        return replace(self, t=self.t[keep], S_mean=self.S_mean[keep], S_stderr=self.S_stderr[keep])

    def metadata(self) -> dict:
        meta = {"L": self.L, "p": repr(float(self.p)), "initial_state": self.initial_state.value,
                "n_trajectories": self.n_trajectories, "seed": self.seed, "version": self.version}
        meta.update(self.conventions)
        return meta


def series_filename(L: int, p: float, initial_state, n: int) -> str:
    kind = InitialState.parse(initial_state).value
    return f"S_L{L}_p{float(p):.6g}_init{kind}_n{n}.csv"


@dataclass
class _Sums:
    s1: np.ndarray
    s2: np.ndarray
    measurements: int = 0

    def __iadd__(self, other: "_Sums"):
        self.s1 += other.s1
        self.s2 += other.s2
        self.measurements += other.measurements
        return self


def _run_chunk(base: CircuitConfig, indices: list[int]) -> _Sums:
    acc = _Sums(np.zeros(base.t_max + 1, dtype=np.int64), np.zeros(base.t_max + 1, dtype=np.int64))
    for i in indices:
        try:
            res = run_trajectory(base.with_trajectory(i))
        except Exception as exc:  # re-raised with the trajectory identity
            raise TrajectoryError(i, base.seed, exc) from exc
        acc.s1 += res.S_series
        acc.s2 += res.S_series * res.S_series
        acc.measurements += res.measurement_count
    return acc


def _chunks(n: int, k: int) -> list[list[int]]:
    size = max(1, math.ceil(n / k))
    return [list(range(i, min(n, i + size))) for i in range(0, n, size)]


def run_ensemble(spec: EnsembleSpec) -> EnsembleSeries:
    """Run trajectories ``0..n-1`` of ``spec.base`` and return mean and standard error of S(t)."""
    base, n = spec.base, spec.n_trajectories
    if spec.workers == 1:
        total = _run_chunk(base, list(range(n)))
    else:
        chunks = _chunks(n, 4 * spec.workers)
        total = _Sums(np.zeros(base.t_max + 1, dtype=np.int64), np.zeros(base.t_max + 1, dtype=np.int64))
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for part in pool.map(_run_chunk, [base] * len(chunks), chunks):
                total += part
    return _finish(base, n, total)


def _finish(base: CircuitConfig, n: int, total: _Sums) -> EnsembleSeries:
    mean = total.s1 / n
    if n > 1:
        # exact integer numerator avoids cancellation
        var = (n * total.s2 - total.s1 * total.s1) / (n * (n - 1))
        stderr = np.sqrt(np.maximum(var, 0.0) / n)
    else:
        stderr = np.zeros_like(mean)
    conventions = dict(CONVENTIONS)
    conventions.update(measurement_layers_per_unit=base.measurement_layers_per_unit,
                       prep_time=base.prep_time if base.initial_state is InitialState.VOLUME_LAW else 0,
                       t_max=base.t_max, mean_measurements=repr(total.measurements / n))
    return EnsembleSeries(base.L, base.p, base.initial_state, np.arange(base.t_max + 1),
                          mean, stderr, n, base.seed, __version__, conventions)


def fixed_w_probabilities(w: float, Ls, p_c: float = 0.15995, nu: float = 1.260) -> list[float]:
    """``p = p_c + w * L**(-1/nu)`` per size, holding ``g L^(1/nu) = w`` fixed."""
    return [p_c + w * float(L) ** (-1.0 / nu) for L in Ls]


def sweep(specs, workers: int | None = None) -> list[EnsembleSeries]:
    out = []
    for spec in specs:
        if workers is not None:
            spec = replace(spec, workers=workers)
        log.info("ensemble L=%d p=%.6g init=%s n=%d", spec.base.L, spec.base.p,
                 spec.base.initial_state.value, spec.n_trajectories)
        out.append(run_ensemble(spec))
    return out


def write_series_csv(series: EnsembleSeries, path, extra_meta: dict | None = None) -> Path:
    path = Path(path)
    if path.is_dir():
        path = path / series.filename
    meta = series.metadata()
    if extra_meta:
        meta.update(extra_meta)
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append("t,S_mean,S_stderr")
    for t, m, e in zip(series.t, series.S_mean, series.S_stderr):
        lines.append(f"{int(t)},{float(m)!r},{float(e)!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_series_csv(path) -> EnsembleSeries:
    meta = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line and not line.startswith("t,"):
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, 3)
    known = {"L", "p", "initial_state", "n_trajectories", "seed", "version"}
    return EnsembleSeries(
        L=int(meta["L"]), p=float(meta["p"]), initial_state=InitialState.parse(meta["initial_state"]),
        t=data[:, 0].astype(np.int64), S_mean=data[:, 1], S_stderr=data[:, 2],
        n_trajectories=int(meta["n_trajectories"]), seed=int(meta["seed"]),
        version=meta.get("version", ""), conventions={k: v for k, v in meta.items() if k not in known})


def write_sweep_manifest(series_list, paths, path, extra: dict | None = None) -> Path:
    entries = []
    for s, p in zip(series_list, paths):
        entries.append({"file": Path(p).name, "L": s.L, "p": float(s.p),
                        "initial_state": s.initial_state.value, "n_trajectories": s.n_trajectories,
                        "sha256": hashlib.sha256(Path(p).read_bytes()).hexdigest()})
    doc = {"version": __version__, "conventions": CONVENTIONS, "series": entries}
    if extra:
        doc.update(extra)
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def spec_dict(spec: EnsembleSpec) -> dict:
    d = asdict(spec.base)
    d["initial_state"] = spec.base.initial_state.value
    d["n_trajectories"] = spec.n_trajectories
    return d
