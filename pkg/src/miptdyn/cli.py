"""Command-line front end.

Commands::

    miptdyn run MANIFEST            sweeps then analyses from a TOML manifest
    miptdyn sweep --L .. --p ..     ensembles straight from flags
    miptdyn collapse CSV ...        rescaled curves and collapse score
    miptdyn fit CSV ... --model ..  power / log / steady-alpha / linear-in-L fits
    miptdyn scan-critical --L ..    short-time curvature scan over a p grid

Exit status: 0 success, 1 physics check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .circuit import CircuitConfig, ConfigError
from .ensemble import CONVENTIONS, EnsembleSpec, TrajectoryError, fixed_w_probabilities, run_ensemble, \
    write_series_csv, write_sweep_manifest
from .manifest import ManifestError, derive_seed, load_manifest, resolve_path
from .pipeline import AnalysisFailure, dump_json, load_series, run_analysis, run_manifest
from .scaling import FitError, ScalingParams

EXIT_OK, EXIT_PHYSICS, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("miptdyn")


class UsageError(ValueError):
    pass


def _scaling_args(p: argparse.ArgumentParser) -> None:
    d = ScalingParams()
    p.add_argument("--p-c", type=float, default=d.p_c, help="critical measurement rate")
    p.add_argument("--alpha", type=float, default=d.alpha, help="coefficient of ln L")
    p.add_argument("--nu", type=float, default=d.nu, help="correlation-length exponent")
    p.add_argument("--z", type=float, default=d.z, help="dynamic exponent")


def _params(args) -> ScalingParams:
    return ScalingParams(p_c=args.p_c, alpha=args.alpha, nu=args.nu, z=args.z)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="miptdyn", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a TOML experiment manifest (path or bundled name: fig2, fig3, fig4)")
    r.add_argument("manifest")
    r.add_argument("--seed", type=int, help="override the master seed")
    r.add_argument("--workers", type=int, help="worker processes per ensemble")
    r.add_argument("--out", help="override the output directory")

    s = sub.add_parser("sweep", help="run ensembles over sizes and rates given on the command line")
    s.add_argument("--L", type=int, nargs="+", required=True)
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--p", type=float, nargs="+", help="measurement rates")
    grp.add_argument("--w", type=float, help="fixed g L^(1/nu); uses --p-c and --nu")
    s.add_argument("--init", default="product", help="product or volume")
    s.add_argument("--n", type=int, default=100, help="trajectories per ensemble")
    s.add_argument("--t-max", type=int, default=100)
    s.add_argument("--prep-time", type=int, help="volume-law preparation time (default 4L)")
    s.add_argument("--layers", type=int, default=2, help="measurement layers per time unit (1 or 2)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default="out/sweep")
    _scaling_args(s)

    c = sub.add_parser("collapse", help="rescale ensemble CSVs and score their collapse")
    c.add_argument("csv", nargs="+")
    c.add_argument("--form", choices=["relaxation", "short-time"], default="relaxation")
    c.add_argument("--perturb", type=float, default=1.2, help="factor applied to alpha, nu, z for comparison")
    c.add_argument("--t-lo", type=float, default=4.0, help="short-time form: first time kept")
    c.add_argument("--t-cut", type=float, help="short-time form: last time kept")
    c.add_argument("--delta", type=float, help="short-time form: ln t coefficient (default alpha/z)")
    c.add_argument("--out", default="out/collapse")
    _scaling_args(c)

    f = sub.add_parser("fit", help="fit ensemble CSVs")
    f.add_argument("csv", nargs="+")
    f.add_argument("--model", choices=["power", "log", "steady-alpha", "linear-in-L"], required=True)
    f.add_argument("--window", type=float, nargs=2, metavar=("T_LO", "T_HI"))
    f.add_argument("--plateau", type=float, nargs=2, metavar=("LO", "HI"), default=[2.0, 4.0],
                   help="steady-alpha: plateau window in units of L")
    tg = f.add_mutually_exclusive_group()
    tg.add_argument("--time", type=int, help="linear-in-L: absolute time")
    tg.add_argument("--x", type=float, help="linear-in-L: rescaled time t L^-z")
    f.add_argument("--out", help="write the JSON report here instead of stdout")
    _scaling_args(f)

    k = sub.add_parser("scan-critical", help="bracket p_c from short-time curvature of S against ln t")
    k.add_argument("--L", type=int, default=256)
    k.add_argument("--p", type=float, nargs="+", required=True, help="grid of measurement rates")
    k.add_argument("--n", type=int, default=200)
    k.add_argument("--t-max", type=int, default=100)
    k.add_argument("--window", type=float, nargs=2, metavar=("T_LO", "T_HI"))
    k.add_argument("--threshold", type=float, default=2.0, help="significance (in sigma) for a curved verdict")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--workers", type=int, default=1)
    k.add_argument("--out", help="directory for CSVs and the JSON report")
    return parser


def cmd_run(args) -> int:
    manifest = load_manifest(resolve_path(args.manifest), args.out, args.seed, args.workers)
    if manifest.empty:
        print(f"{manifest.name}: nothing to run")
        return EXIT_OK
    reports = run_manifest(manifest)
    for stem in reports:
        print(f"wrote {manifest.output_dir / 'analysis' / stem}.json")
    print(f"{manifest.name}: done ({len(manifest.ensembles)} ensembles, {len(reports)} analyses)")
    return EXIT_OK


def _cli_meta(args, extra: dict | None = None) -> dict:
    # the argument vector plays the role of the manifest for direct commands
    argv = json.dumps({k: v for k, v in sorted(vars(args).items()) if k != "func"}, sort_keys=True)
    meta = {"manifest_sha256": hashlib.sha256(argv.encode()).hexdigest(), "version": __version__}
    meta.update(extra or {})
    return meta


def cmd_sweep(args) -> int:
    params = _params(args)
    members = ([(L, p) for L in args.L for p in args.p] if args.p is not None
               else list(zip(args.L, fixed_w_probabilities(args.w, args.L, params.p_c, params.nu))))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = _cli_meta(args, {"master_seed": args.seed})
    series, paths = [], []
    for k, (L, p) in enumerate(members):
        cfg = CircuitConfig(L=L, p=p, initial_state=args.init, t_max=args.t_max, prep_time=args.prep_time,
                            seed=derive_seed(args.seed, 0, k), measurement_layers_per_unit=args.layers)
        s = run_ensemble(EnsembleSpec(cfg, args.n, args.workers))
        paths.append(write_series_csv(s, out, meta))
        series.append(s)
        print(f"wrote {paths[-1]}")
    write_sweep_manifest(series, paths, out / "sweep.json", meta)
    return EXIT_OK


def cmd_collapse(args) -> int:
    series = load_series(args.csv)
    params = _params(args)
    if args.form == "relaxation":
        kind, opts = "collapse", {"perturb": args.perturb}
    else:
        kind, opts = "short-time-collapse", {"t_lo": args.t_lo, "t_cut": args.t_cut, "delta": args.delta}
    doc = run_analysis(kind, series, params, opts, Path(args.out), kind, _cli_meta(args))
    rep = doc["report"]
    print(f"collapse score {rep['score']:.6g}" +
          (f", perturbed {rep['perturbed_score']:.6g}" if "perturbed_score" in rep else ""))
    return EXIT_OK


def cmd_fit(args) -> int:
    series = load_series(args.csv)
    opts = {}
    if args.window:
        opts["window"] = list(args.window)
    if args.model == "steady-alpha":
        opts["plateau"] = list(args.plateau)
    if args.model == "linear-in-L":
        if args.x is not None:
            opts["x"] = args.x
        else:
            opts["time"] = args.time if args.time is not None else 8
    from .pipeline import ANALYSIS_FUNCS
    report, _ = ANALYSIS_FUNCS[args.model](series, _params(args), opts)
    doc = {"analysis": args.model, "options": opts, "report": report, **_cli_meta(args)}
    if args.out:
        dump_json(doc, Path(args.out))
        print(f"wrote {args.out}")
    else:
        print(json.dumps(doc, indent=2, sort_keys=True, default=str))
    return EXIT_OK


def cmd_scan_critical(args) -> int:
    from .pipeline import scan_analysis
    series = []
    out = Path(args.out) if args.out else None
    meta = _cli_meta(args, {"master_seed": args.seed})
    for k, p in enumerate(sorted(args.p)):
        cfg = CircuitConfig(L=args.L, p=p, t_max=args.t_max, seed=derive_seed(args.seed, 0, k))
        s = run_ensemble(EnsembleSpec(cfg, args.n, args.workers))
        series.append(s)
        if out:
            out.mkdir(parents=True, exist_ok=True)
            write_series_csv(s, out, meta)
    opts = {"threshold": args.threshold}
    if args.window:
        opts["window"] = list(args.window)
    report, _ = scan_analysis(series, ScalingParams(), opts)
    for e in report["entries"]:
        print(f"p={e['p']:.5f}  {e['classification']:<8}  curvature={e['curvature']:+.4f} +- {e['error']:.4f}")
    if out:
        dump_json({"analysis": "scan", "options": opts, "report": report, "conventions": CONVENTIONS, **meta},
                  out / "scan.json")
    if report["bracket"] is None:
        print(report["message"])
        return EXIT_PHYSICS
    lo, hi = report["bracket"]
    print(f"p_c in [{lo:.5f}, {hi:.5f}] ({report['message']})")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "collapse": cmd_collapse, "fit": cmd_fit,
            "scan-critical": cmd_scan_critical}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ManifestError, ConfigError, UsageError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # ScalingParams and CSV parsing raise plain ValueError on bad input
        if isinstance(exc, FitError):
            print(f"fit failed: {exc}", file=sys.stderr)
            return EXIT_PHYSICS
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AnalysisFailure, TrajectoryError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
