"""Analyses over ensemble series, and the manifest runner that ties sweeps to them.

Each analysis takes a list of series, the scaling parameters and an options
dict, and returns a JSON-ready report plus any curves to be written as CSV.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import CONVENTIONS, EnsembleSeries, read_series_csv, run_ensemble, write_series_csv, \
    write_sweep_manifest
from .scaling import (
    RescaledCurve, ScalingParams, collapse_score, critical_scan, default_window, fit_linear, fit_log_growth,
    fit_log_growth_rescaled, fit_power_decay, fit_steady_alpha, rescale, short_time_offcritical_collapse,
)

log = logging.getLogger(__name__)


class AnalysisFailure(RuntimeError):
    """A physics check that did not come out as required (exit status 1)."""


def _window(series: EnsembleSeries, options: dict) -> tuple[float, float]:
    win = options.get("window")
    return tuple(float(v) for v in win) if win else default_window(series.L)


def _ident(s: EnsembleSeries) -> dict:
    return {"L": s.L, "p": float(s.p), "initial_state": s.initial_state.value, "n_trajectories": s.n_trajectories}


def power_analysis(series_list, params: ScalingParams, options: dict):
    """Power-law decay fit per series, and amplitude ratios between successive sizes."""
    fits = []
    curves = []
    for s in sorted(series_list, key=lambda s: s.L):
        f = fit_power_decay(s, _window(s, options))
        fits.append({**_ident(s), **f.to_dict()})
        keep = s.t > 0
        curves.append(("loglog", RescaledCurve(s.t[keep].astype(float), s.S_mean[keep], s.S_stderr[keep],
                                               s.L, s.p, params.w(s.p, s.L), s.t[keep])))
    ratios = []
    for a, b in zip(fits, fits[1:]):
        ratios.append({"L": [a["L"], b["L"]],
                       "amplitude_ratio": b["coefficients"]["amplitude"]["value"]
                       / a["coefficients"]["amplitude"]["value"]})
    return {"fits": fits, "amplitude_ratios": ratios}, curves


def log_analysis(series_list, params: ScalingParams, options: dict):
    """``S = delta ln t + c`` per series, directly and on the rescaled curve."""
    fits = []
    for s in sorted(series_list, key=lambda s: s.L):
        win = _window(s, options)
        f = fit_log_growth(s, win)
        scale = s.L ** (-params.z)
        fr = fit_log_growth_rescaled(rescale(s, params), (win[0] * scale, win[1] * scale))
        fits.append({**_ident(s), **f.to_dict(), "rescaled_delta": fr.coefficients["delta"]})
    return {"fits": fits}, []


def collapse_analysis(series_list, params: ScalingParams, options: dict):
    """Relaxation collapse ``S - alpha ln L`` against ``t L^-z``, with a perturbed-exponent comparison."""
    factor = float(options.get("perturb", 1.2))
    names = tuple(options.get("perturb_names", ("alpha", "nu", "z")))
    curves = [rescale(s, params) for s in series_list]
    score = collapse_score(curves)
    bad = params.perturbed(factor, names)
    bad_score = collapse_score([rescale(s, bad) for s in series_list])
    return ({"score": score, "perturbed_score": bad_score, "perturbation": {"factor": factor, "names": list(names)},
             "ratio": bad_score / score if score > 0 else float("inf"), "curves": [_ident(s) for s in series_list]},
            [("semilogx", c) for c in curves])


def short_time_analysis(series_list, params: ScalingParams, options: dict):
    """Size-free short-time curves ``S - delta ln t`` against ``g t^(1/(nu z))``."""
    t_lo = float(options.get("t_lo", 4))
    t_cut = options.get("t_cut")
    delta = options.get("delta")
    curves, score = short_time_offcritical_collapse(series_list, params, t_lo, t_cut, delta)
    return ({"score": score, "t_lo": t_lo, "t_cut": t_cut,
             "delta": delta if delta is not None else params.delta,
             "curves": [_ident(s) for s in series_list]}, [("linear", c) for c in curves])


def plateau(series: EnsembleSeries, lo_over_L: float, hi_over_L: float) -> tuple[float, float]:
    """Mean S over ``lo*L <= t <= hi*L``; the error is the mean stderr (a conservative bound)."""
    w = series.window(lo_over_L * series.L, hi_over_L * series.L)
    if len(w.t) == 0:
        raise AnalysisFailure(f"plateau window is empty for L={series.L} (t_max={series.t[-1]})")
    return float(w.S_mean.mean()), float(w.S_stderr.mean())


def steady_alpha_analysis(series_list, params: ScalingParams, options: dict):
    lo, hi = options.get("plateau", [2.0, 4.0])
    rows = sorted((s.L, *plateau(s, lo, hi)) for s in series_list)
    Ls, S, err = (np.array(v) for v in zip(*rows))
    f = fit_steady_alpha(Ls, S, err)
    return {"plateau_over_L": [lo, hi], "sizes": Ls.tolist(), "S": S.tolist(), "S_err": err.tolist(),
            **f.to_dict()}, []


def linear_in_L_analysis(series_list, params: ScalingParams, options: dict):
    """S against L at one time, either absolute (``time``) or rescaled (``x = t L^-z``)."""
    rows = []
    for s in sorted(series_list, key=lambda s: s.L):
        t = int(round(options["x"] * s.L ** params.z)) if "x" in options else int(options.get("time", 8))
        idx = np.searchsorted(s.t, t)
        if idx >= len(s.t) or s.t[idx] != t:
            raise AnalysisFailure(f"time {t} not recorded for L={s.L}")
        rows.append((s.L, t, float(s.S_mean[idx]), float(s.S_stderr[idx])))
    Ls, ts, S, err = (np.array(v) for v in zip(*rows))
    fit, r2 = fit_linear(Ls.astype(float), S, err)
    return {"times": ts.tolist(), "sizes": Ls.tolist(), "S": S.tolist(), "S_err": err.tolist(),
            "r_squared": r2, **fit.to_dict()}, []


def scan_analysis(series_list, params: ScalingParams, options: dict):
    win = options.get("window")
    res = critical_scan(series_list, tuple(win) if win else None, float(options.get("threshold", 2.0)))
    return res.to_dict(), []


ANALYSIS_FUNCS = {
    "power": power_analysis,
    "log": log_analysis,
    "collapse": collapse_analysis,
    "short-time-collapse": short_time_analysis,
    "steady-alpha": steady_alpha_analysis,
    "linear-in-L": linear_in_L_analysis,
    "scan": scan_analysis,
}

AXES = {
    "loglog": ("t", "S_mean", "log-log"),
    "semilogx": ("t*L^-z", "S_mean-alpha*ln(L)", "semi-log (log x)"),
    "linear": ("g*t^(1/(nu*z))", "S_mean-delta*ln(t)", "linear"),
}


def write_curve_csv(curve: RescaledCurve, kind: str, path: Path, meta: dict) -> Path:
    xlab, ylab, axes = AXES[kind]
    head = dict(meta)
    head.update(L=curve.L, p=repr(float(curve.p)), w=repr(float(curve.w)), x=xlab, y=ylab, axes=axes)
    lines = [f"# {k}={v}" for k, v in head.items()]
    lines.append("x,y,yerr,t")
    for x, y, e, t in zip(curve.x, curve.y, curve.yerr, curve.t):
        lines.append(f"{float(x)!r},{float(y)!r},{float(e)!r},{int(t)}")
    path.write_text("\n".join(lines) + "\n")
    return path


def dump_json(doc: dict, path: Path) -> Path:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o))


def run_analysis(kind: str, series_list, params: ScalingParams, options: dict, out_dir: Path, stem: str,
                 meta: dict) -> dict:
    report, curves = ANALYSIS_FUNCS[kind](series_list, params, options)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for kind_axes, c in curves:
        p = write_curve_csv(c, kind_axes, out_dir / f"{stem}_L{c.L}_p{float(c.p):.6g}.csv", meta)
        files.append(p.name)
    doc = {"analysis": kind, "options": options, "scaling": vars(params).copy(), "report": report,
           "curve_files": files, **meta}
    dump_json(doc, out_dir / f"{stem}.json")
    return doc


def run_manifest(manifest, workers: int | None = None) -> dict:
    """Run every ensemble, write its CSVs, then run the analyses.  Returns the analysis reports by stem."""
    out = manifest.output_dir
    data_dir = out / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    meta = {"manifest_sha256": manifest.sha256, "master_seed": manifest.seed, "version": __version__}
    dump_json({**manifest.resolved(), "conventions": CONVENTIONS, "version": __version__},
              out / "resolved_manifest.json")
    results: dict[str, list[EnsembleSeries]] = {}
    all_series, all_paths = [], []
    for block in manifest.ensembles:
        results[block.name] = []
        for spec in manifest.specs(block, workers):
            log.info("%s: L=%d p=%.6g n=%d", block.name, spec.base.L, spec.base.p, spec.n_trajectories)
            s = run_ensemble(spec)
            path = write_series_csv(s, data_dir / f"{block.name}_{s.filename}", {**meta, "ensemble": block.name})
            results[block.name].append(s)
            all_series.append(s)
            all_paths.append(path)
    if all_series:
        write_sweep_manifest(all_series, all_paths, out / "sweep.json", meta)
    reports = {}
    for a in manifest.analyses:
        series_list = [s for name in a.ensembles for s in results[name]]
        stem = f"analysis{a.index:02d}_{a.kind}"
        reports[stem] = run_analysis(a.kind, series_list, manifest.scaling, a.options, out / "analysis", stem,
                                     {**meta, "ensembles": a.ensembles})
    return reports


def load_series(paths) -> list[EnsembleSeries]:
    return [read_series_csv(p) for p in paths]
