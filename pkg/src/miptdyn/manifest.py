"""Experiment manifests: TOML files naming ensembles and the analyses to run on them.

A manifest has one ``[experiment]`` table, an optional ``[scaling]`` table of
parameter overrides, and arrays of tables ``[[ensemble]]`` and
``[[analysis]]``.  Every physics convention is either written in the file or
defaulted here, and :meth:`ExperimentManifest.resolved` echoes the full set
so that it can be stored next to the outputs.

Validation errors carry the file line of the offending key.
"""

from __future__ import annotations

import hashlib
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .circuit import CircuitConfig, ConfigError, InitialState
from .ensemble import EnsembleSpec, fixed_w_probabilities
from .scaling import ScalingParams

ANALYSES = ("power", "log", "collapse", "short-time-collapse", "steady-alpha", "linear-in-L", "scan")
BUNDLED_DIR = Path(__file__).parent / "manifests"


class ManifestError(ValueError):
    """Parse or validation failure; ``line`` is 1-based or ``None``."""

    def __init__(self, path, field: str, message: str, line: int | None = None):
        self.path = str(path)
        self.field = field
        self.line = line
        where = f"{self.path}:{line}" if line else self.path
        super().__init__(f"{where}: {field}: {message}")


@dataclass
class EnsembleBlock:
    name: str
    L: list[int]
    p: list[float] | None
    w: float | None
    initial_state: InitialState
    n_trajectories: int
    t_max: int
    prep_time: int | None
    prep_time_per_L: float
    measurement_layers_per_unit: int
    index: int

    def prep_for(self, L: int) -> int:
        return self.prep_time if self.prep_time is not None else int(round(self.prep_time_per_L * L))


@dataclass
class AnalysisBlock:
    kind: str
    ensembles: list[str]
    options: dict = field(default_factory=dict)
    index: int = 0


@dataclass
class ExperimentManifest:
    path: Path
    name: str
    output_dir: Path
    seed: int
    workers: int
    scaling: ScalingParams
    ensembles: list[EnsembleBlock]
    analyses: list[AnalysisBlock]
    sha256: str

    @property
    def empty(self) -> bool:
        return not self.ensembles and not self.analyses

    def ensemble(self, name: str) -> EnsembleBlock:
        for e in self.ensembles:
            if e.name == name:
                return e
        raise KeyError(name)

    def specs(self, block: EnsembleBlock, workers: int | None = None) -> list[EnsembleSpec]:
        """One spec per (L, p) member of the block, each with its own derived seed."""
        out = []
        for k, (L, p) in enumerate(self.members(block)):
            cfg = CircuitConfig(L=L, p=p, initial_state=block.initial_state, t_max=block.t_max,
                                prep_time=block.prep_for(L), seed=derive_seed(self.seed, block.index, k),
                                measurement_layers_per_unit=block.measurement_layers_per_unit)
            out.append(EnsembleSpec(cfg, block.n_trajectories, workers or self.workers))
        return out

    def members(self, block: EnsembleBlock) -> list[tuple[int, float]]:
        if block.w is not None:
            ps = fixed_w_probabilities(block.w, block.L, self.scaling.p_c, self.scaling.nu)
            return list(zip(block.L, ps))
        return [(L, p) for L in block.L for p in block.p]

    def resolved(self) -> dict:
        """Everything the run depends on, defaults filled in."""
        return {
            "experiment": {"name": self.name, "seed": self.seed, "manifest_sha256": self.sha256},
            "scaling": vars(self.scaling).copy(),
            "ensembles": [{"name": e.name, "members": [[L, repr(p)] for L, p in self.members(e)],
                           "initial_state": e.initial_state.value, "n_trajectories": e.n_trajectories,
                           "t_max": e.t_max, "prep_time": [e.prep_for(L) for L in e.L],
                           "measurement_layers_per_unit": e.measurement_layers_per_unit}
                          for e in self.ensembles],
            "analyses": [{"kind": a.kind, "ensembles": a.ensembles, **a.options} for a in self.analyses],
        }


def derive_seed(master: int, block: int, member: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=(int(block), int(member)))
    return int(ss.generate_state(1, np.uint64)[0])


def locate(text: str, table: str, index: int, key: str | None) -> int | None:
    """Line of ``key`` inside occurrence ``index`` of ``[table]`` / ``[[table]]``."""
    header = re.compile(r"^\s*\[\[?\s*([A-Za-z0-9_.-]+)\s*\]\]?")
    count = -1
    inside = False
    start = None
    for no, line in enumerate(text.splitlines(), 1):
        m = header.match(line)
        if m:
            inside = m.group(1) == table
            if inside:
                count += 1
                if count == index:
                    start = no
            continue
        if inside and count == index and key is not None:
            if re.match(rf"^\s*{re.escape(key)}\s*=", line):
                return no
    return start


def resolve_path(name: str | Path) -> Path:
    """A file path, or the name of a bundled manifest (``fig2``, ``fig3``, ``fig4``)."""
    path = Path(name)
    if path.exists():
        return path
    bundled = BUNDLED_DIR / f"{Path(name).stem}.toml"
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"no manifest at {name} and no bundled manifest of that name")


def load_manifest(path, output_dir=None, seed=None, workers=None) -> ExperimentManifest:
    path = Path(path)
    raw = path.read_bytes()
    text = raw.decode("utf-8")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ManifestError(path, "syntax", str(exc), int(m.group(1)) if m else None) from None

    def fail(table, index, key, message):
        raise ManifestError(path, f"{table}[{index}].{key}" if table in ("ensemble", "analysis")
                            else f"{table}.{key}", message, locate(text, table, index, key))

    unknown = set(doc) - {"experiment", "scaling", "ensemble", "analysis"}
    if unknown:
        key = sorted(unknown)[0]
        raise ManifestError(path, key, "unknown top-level table", locate(text, key, 0, None))

    exp = doc.get("experiment", {})
    name = exp.get("name", path.stem)
    out = Path(output_dir) if output_dir else Path(exp.get("output_dir", f"out/{name}"))
    master = seed if seed is not None else exp.get("seed", 0)
    if not isinstance(master, int) or not 0 <= master < 2**64:
        fail("experiment", 0, "seed", f"must be a non-negative 64-bit integer, got {master!r}")
    nworkers = workers if workers is not None else exp.get("workers", 1)
    if not isinstance(nworkers, int) or nworkers < 1:
        fail("experiment", 0, "workers", f"must be a positive integer, got {nworkers!r}")

    sc = doc.get("scaling", {})
    bad = set(sc) - {"p_c", "alpha", "nu", "z"}
    if bad:
        fail("scaling", 0, sorted(bad)[0], "unknown scaling parameter")
    try:
        scaling = ScalingParams(**{k: float(v) for k, v in sc.items()})
    except ValueError as exc:
        key = next(iter(sc), "p_c")
        fail("scaling", 0, key, str(exc))

    blocks = []
    names = set()
    for i, e in enumerate(doc.get("ensemble", [])):
        blocks.append(_ensemble_block(e, i, names, fail))
    analyses = []
    for i, a in enumerate(doc.get("analysis", [])):
        kind = a.get("kind")
        if kind not in ANALYSES:
            fail("analysis", i, "kind", f"must be one of {', '.join(ANALYSES)}, got {kind!r}")
        ens = a.get("ensembles", [])
        if isinstance(ens, str):
            ens = [ens]
        if not ens:
            fail("analysis", i, "ensembles", "must name at least one ensemble")
        for n in ens:
            if n not in names:
                fail("analysis", i, "ensembles", f"unknown ensemble {n!r}")
        opts = {k: v for k, v in a.items() if k not in ("kind", "ensembles")}
        if "window" in opts:
            win = opts["window"]
            if not (isinstance(win, list) and len(win) == 2 and win[0] < win[1]):
                fail("analysis", i, "window", f"must be [lo, hi] with lo < hi, got {win!r}")
        analyses.append(AnalysisBlock(kind, list(ens), opts, i))

    return ExperimentManifest(path, name, out, master, nworkers, scaling, blocks, analyses,
                              hashlib.sha256(raw).hexdigest())


def _ensemble_block(e: dict, i: int, names: set, fail) -> EnsembleBlock:
    allowed = {"name", "L", "p", "w", "initial_state", "n_trajectories", "t_max", "prep_time",
               "measurement_layers_per_unit"}
    for key in e:
        if key not in allowed:
            fail("ensemble", i, key, "unknown key")
    name = e.get("name", f"ensemble{i}")
    if name in names:
        fail("ensemble", i, "name", f"duplicate ensemble name {name!r}")
    names.add(name)
    Ls = e.get("L")
    Ls = [Ls] if isinstance(Ls, int) else Ls
    if not Ls:
        fail("ensemble", i, "L", "is required")
    if ("p" in e) == ("w" in e):
        fail("ensemble", i, "p", "give exactly one of p or w")
    ps = None
    if "p" in e:
        ps = e["p"] if isinstance(e["p"], list) else [e["p"]]
    prep = e.get("prep_time", "4L")
    prep_abs, prep_per_L = None, 4.0
    if isinstance(prep, str):
        m = re.fullmatch(r"\s*([0-9.]+)\s*L\s*", prep)
        if not m:
            fail("ensemble", i, "prep_time", f"must be an integer or '<k>L', got {prep!r}")
        prep_per_L = float(m.group(1))
    else:
        prep_abs = prep
    n = e.get("n_trajectories", 100)
    if not isinstance(n, int) or n < 1:
        fail("ensemble", i, "n_trajectories", f"must be a positive integer, got {n!r}")
    try:
        init = InitialState.parse(e.get("initial_state", "product"))
    except ValueError as exc:
        fail("ensemble", i, "initial_state", str(exc))
    block = EnsembleBlock(name, list(Ls), ps, e.get("w"), init, n, e.get("t_max", 100), prep_abs,
                          prep_per_L, e.get("measurement_layers_per_unit", 2), i)
    # reuse the circuit's own validation so messages name the same fields
    for L in block.L:
        for p in (block.p or [0.5]):
            try:
                CircuitConfig(L=L, p=p, initial_state=init, t_max=block.t_max, prep_time=block.prep_for(L),
                              measurement_layers_per_unit=block.measurement_layers_per_unit)
            except ConfigError as exc:
                fail("ensemble", i, exc.field, str(exc).split(": ", 1)[1])
    return block
