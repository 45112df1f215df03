"""Command-line front end: ``asymwalk evolve|sweep|thresholds|emulate``.

Every command resolves its parameters from ``--config`` (a JSON document,
or a ``manifest.json`` from an earlier run) overridden by explicit flags,
writes CSV data and SVG charts to ``--out``, and records the resolved
parameters plus file checksums in ``manifest.json``.

Exit status: 0 success, 1 usage error, 2 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .emulator import (
    BASES,
    LoopConfig,
    reconstruct,
    simulate_repeats,
    write_counts_csv,
)
from .errors import ConfigError, DomainError, WalkError
from .observables import position_distribution, summarize
from .sweep import (
    SweepGrid,
    default_phi_axis,
    default_theta_axis,
    export_csv,
    read_sweep_csv,
    run_sweep,
    threshold_regions,
)
from .walk import WalkParams, evolve

log = logging.getLogger("asymwalk")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

PRESETS = {
    # theta x phi maps
    "fig1": {"second_axis_kind": "phi", "fixed": {"gamma": 0.0}},
    # theta curves for gamma = 0, 0.1, 0.2 at phi = 0 and phi = pi/4
    "fig2a": {"second_axis_kind": "gamma", "second_axis": [0.0, 0.1, 0.2], "fixed": {"phi": 0.0}},
    "fig2b": {"second_axis_kind": "gamma", "second_axis": [0.0, 0.1, 0.2], "fixed": {"phi": math.pi / 4}},
}
PRESETS["fig3a"] = PRESETS["fig2a"]
PRESETS["fig3b"] = PRESETS["fig2b"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_config(path: str | None, command: str) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    if "command" in doc and "config" in doc:
        if doc["command"] != command:
            raise UsageError(f"manifest {path} was written by {doc['command']!r}, not {command!r}")
        doc = doc["config"]
    return doc


def _pick(flag: Any, cfg: dict, key: str, default: Any) -> Any:
    return flag if flag is not None else cfg.get(key, default)


def _phi_from(args, cfg: dict, default: float = 0.0) -> float:
    if args.phi is not None and args.phi_over_pi is not None:
        raise UsageError("give --phi or --phi-over-pi, not both")
    if args.phi_over_pi is not None:
        return args.phi_over_pi * math.pi
    return float(_pick(args.phi, cfg, "phi", default))


def _write_manifest(out: Path, command: str, config: dict, files: Sequence[Path], threads: int) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "threads": threads,
        "artifacts": {p.name: _sha256(p) for p in sorted(files, key=lambda p: p.name)},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _writer(path: Path):
    fh = path.open("w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


# -- evolve -----------------------------------------------------------------


def cmd_evolve(args) -> tuple[list[Path], dict]:
    cfg = _load_config(args.config, "evolve")
    resolved = {
        "theta": float(_pick(args.theta, cfg, "theta", 45.0)),
        "phi": _phi_from(args, cfg),
        "gamma": float(_pick(args.gamma, cfg, "gamma", 0.0)),
        "steps": int(_pick(args.steps, cfg, "steps", 16)),
    }
    try:
        params = WalkParams(**resolved)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    state = evolve(params)
    dist = position_distribution(state)
    summary = summarize(state)

    dist_csv = out / "distribution.csv"
    fh, w = _writer(dist_csv)
    with fh:
        w.writerow(["x", "p_h", "p_v", "p_total"])
        for x, ph, pv, pt in zip(dist.x, dist.p_h, dist.p_v, dist.p_total):
            w.writerow([int(x), _fmt(ph), _fmt(pv), _fmt(pt)])
    summary_csv = out / "summary.csv"
    fh, w = _writer(summary_csv)
    with fh:
        w.writerow(list(summary._fields))
        w.writerow([_fmt(v) for v in summary])

    from .plotting import plot_distribution

    title = rf"$\theta={params.theta:g}^\circ$, $\gamma={params.gamma:g}$, $t={params.steps}$"
    svg = plot_distribution(dist, out / "distribution.svg", title=title)
    print(
        f"argmax x={dist.argmax()} p={dist.p_total.max():.6f} "
        f"S_E={summary.s_e:.6f} IPR={summary.ipr:.6f} survival={summary.survival:.6g}"
    )
    return [dist_csv, summary_csv, svg], resolved


# -- sweep ------------------------------------------------------------------


def _parse_list(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected a comma-separated list of numbers") from None


def cmd_sweep(args) -> tuple[list[Path], dict]:
    cfg = _load_config(args.config, "sweep")
    doc: dict = {}
    if args.preset:
        doc.update(json.loads(json.dumps(PRESETS[args.preset])))
    doc.update({k: v for k, v in cfg.items() if k in ("theta_axis", "second_axis_kind", "second_axis", "steps", "fixed")})
    if args.kind is not None:
        doc["second_axis_kind"] = args.kind
    if args.second is not None:
        doc["second_axis"] = _parse_list(args.second, "--second")
    if args.theta_pitch is not None:
        doc["theta_axis"] = default_theta_axis(args.theta_pitch).tolist()
    if args.steps is not None:
        doc["steps"] = args.steps
    fixed = dict(doc.get("fixed") or {})
    if args.gamma is not None:
        fixed["gamma"] = args.gamma
    if args.phi is not None or args.phi_over_pi is not None:
        fixed["phi"] = _phi_from(args, {})
    doc["fixed"] = fixed

    doc.setdefault("theta_axis", default_theta_axis().tolist())
    if "second_axis_kind" not in doc:
        raise UsageError("sweep needs second_axis_kind (config key, --kind or --preset)")
    if "second_axis" not in doc and doc["second_axis_kind"] == "phi":
        doc["second_axis"] = default_phi_axis().tolist()
    try:
        grid = SweepGrid.from_dict(doc)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_sweep(grid, threads=args.threads)
    sweep_csv = export_csv(result, out / "sweep.csv")

    from .plotting import plot_curves, plot_heatmap

    if grid.second_axis_kind == "phi" and len(grid.second_axis) > 1:
        svg = plot_heatmap(result, out / "heatmap.svg")
    else:
        svg = plot_curves(result, out / "curves.svg")
    print(f"{grid.shape[0]}x{grid.shape[1]} cells -> {sweep_csv}")
    return [sweep_csv, svg], grid.to_dict()


# -- thresholds -------------------------------------------------------------


def cmd_thresholds(args) -> tuple[list[Path], dict]:
    cfg = _load_config(args.config, "thresholds")
    resolved = {
        "sweep_csv": str(_pick(args.sweep_csv, cfg, "sweep_csv", None) or ""),
        "quantity": _pick(args.quantity, cfg, "quantity", "s_e"),
        "threshold": float(_pick(args.threshold, cfg, "threshold", 0.95)),
        "direction": _pick(args.direction, cfg, "direction", "above"),
    }
    if not resolved["sweep_csv"]:
        raise UsageError("thresholds needs a sweep CSV")
    if resolved["quantity"] not in ("s_e", "ipr", "survival"):
        raise UsageError(f"unknown quantity {resolved['quantity']!r}")
    if resolved["direction"] not in ("above", "below"):
        raise UsageError(f"unknown direction {resolved['direction']!r}")
    try:
        result = read_sweep_csv(resolved["sweep_csv"])
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    except OSError as exc:
        raise UsageError(f"cannot read {resolved['sweep_csv']}: {exc}") from None
    regions = threshold_regions(result, resolved["quantity"], resolved["threshold"], resolved["direction"])
    for value, intervals in regions.items():
        spans = " ".join(f"[{lo:g}, {hi:g}]" for lo, hi in intervals)
        print(f"{value:.12g}: {spans}".rstrip())

    files: list[Path] = []
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "thresholds.csv"
        fh, w = _writer(path)
        with fh:
            w.writerow(["second_axis_name", "second_axis_value", "theta_lo", "theta_hi"])
            for value, intervals in regions.items():
                for lo, hi in intervals:
                    w.writerow([result.grid.second_axis_kind, _fmt(value), _fmt(lo), _fmt(hi)])
        files.append(path)
    return files, resolved


# -- emulate ----------------------------------------------------------------


def _as_list(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(value)]


def cmd_emulate(args) -> tuple[list[Path], dict]:
    cfg = _load_config(args.config, "emulate")
    try:
        loop = LoopConfig.from_dict(cfg.get("loop", {}))
    except (ConfigError, DomainError) as exc:
        raise UsageError(str(exc)) from None
    if args.n0 is not None:
        loop = LoopConfig(**{**loop.to_dict(), "n0": args.n0})
    resolved = {
        "theta": _as_list(_pick(args.theta, cfg, "theta", [37.0, 48.0, 59.0])),
        "phi": _phi_from(args, cfg),
        "gamma": _as_list(_pick(args.gamma, cfg, "gamma", [0.0])),
        "steps": int(_pick(args.steps, cfg, "steps", 16)),
        "repeats": int(_pick(args.repeats, cfg, "repeats", 10)),
        "completion": _pick(args.completion, cfg, "completion", "oracle-im"),
        "seed": int(_pick(args.seed, cfg, "seed", 0)),
        "loop": loop.to_dict(),
    }
    if resolved["repeats"] < 1:
        raise UsageError("--repeats must be >= 1")
    if resolved["completion"] not in ("oracle-im", "zero-im"):
        raise UsageError(f"unknown completion rule {resolved['completion']!r}")
    try:
        grid_params = {
            (th, g): WalkParams(th, resolved["phi"], g, resolved["steps"])
            for th in resolved["theta"]
            for g in resolved["gamma"]
        }
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if resolved["repeats"] == 1:
        print("warning: repeats=1, error bars reported as 0", file=sys.stderr)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    measured: dict = {}
    tomo_csv = out / "tomography.csv"
    fh, w = _writer(tomo_csv)
    with fh:
        w.writerow(["gamma", "theta", "s_e_est", "s_e_err", "ipr_est", "ipr_err"])
        for th in resolved["theta"]:
            m = measured.setdefault(th, {"s_e": [], "s_e_err": [], "ipr": [], "ipr_err": []})
            for g in resolved["gamma"]:
                params = grid_params[(th, g)]
                tables = simulate_repeats(params, loop, resolved["repeats"], resolved["seed"])
                for basis in BASES:
                    path = out / f"counts_{basis}_theta{th:g}_gamma{g:g}.csv"
                    write_counts_csv([t for t in tables if t.basis == basis], path)
                    files.append(path)
                res = reconstruct(tables, resolved["completion"], params)
                w.writerow([_fmt(g), _fmt(th), _fmt(res.s_e_est), _fmt(res.s_e_err), _fmt(res.ipr_est), _fmt(res.ipr_err)])
                m["s_e"].append(res.s_e_est)
                m["s_e_err"].append(res.s_e_err)
                m["ipr"].append(res.ipr_est)
                m["ipr_err"].append(res.ipr_err)
                print(
                    f"theta={th:g} gamma={g:g}: S_E={res.s_e_est:.4f}±{res.s_e_err:.4f} "
                    f"IPR={res.ipr_est:.4f}±{res.ipr_err:.4f}"
                )
    files.append(tomo_csv)

    if len(resolved["gamma"]) > 1:
        from .plotting import plot_tomography

        g_lo, g_hi = min(resolved["gamma"]), max(resolved["gamma"])
        fine = np.linspace(g_lo, g_hi, 41)
        exact = {}
        for th in resolved["theta"]:
            rows = [summarize(evolve(WalkParams(th, resolved["phi"], g, resolved["steps"]))) for g in fine]
            exact[th] = {"gamma": fine, "s_e": [r.s_e for r in rows], "ipr": [r.ipr for r in rows]}
        files.append(plot_tomography(resolved["gamma"], measured, exact, out / "fig7.svg"))
    return files, resolved


# -- entry point ------------------------------------------------------------


def _add_walk_flags(p: argparse.ArgumentParser, multi: bool = False) -> None:
    nargs = "+" if multi else None
    p.add_argument("--theta", type=float, nargs=nargs, help="coin angle(s) in degrees")
    p.add_argument("--phi", type=float, help="initial-state angle in radians")
    p.add_argument("--phi-over-pi", type=float, help="initial-state angle as a multiple of pi")
    p.add_argument("--gamma", type=float, nargs=nargs, help="loss parameter(s)")
    p.add_argument("--steps", type=int, help="number of steps (default 16)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config document or manifest.json")
    common.add_argument("--out", default="out", help="output directory (default ./out)")
    common.add_argument("--seed", type=int, help="RNG seed (emulate)")
    common.add_argument("--threads", type=int, default=1, help="worker threads (sweep)")

    parser = _Parser(prog="asymwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evolve", parents=[common], help="single walk: distribution and summary")
    _add_walk_flags(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", parents=[common], help="grid over theta x (phi|gamma)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="predefined grid (fig1: theta x phi map; fig2a/3a, fig2b/3b: theta curves for three gammas)")
    p.add_argument("--kind", choices=("phi", "gamma"), help="second axis kind")
    p.add_argument("--second", help="comma-separated second-axis values")
    p.add_argument("--theta-pitch", type=float, help="theta pitch over (0, 90) degrees")
    p.add_argument("--phi", type=float, help="fixed phi (radians) when sweeping gamma")
    p.add_argument("--phi-over-pi", type=float, help="fixed phi as a multiple of pi")
    p.add_argument("--gamma", type=float, help="fixed gamma when sweeping phi")
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("thresholds", parents=[common], help="theta intervals clearing a threshold")
    p.add_argument("sweep_csv", nargs="?", help="CSV written by the sweep command")
    p.add_argument("--quantity", choices=("s_e", "ipr", "survival"))
    p.add_argument("--threshold", type=float)
    p.add_argument("--direction", choices=("above", "below"))
    p.set_defaults(func=cmd_thresholds, out=None)

    p = sub.add_parser("emulate", parents=[common], help="Monte Carlo loop measurement and tomography")
    _add_walk_flags(p, multi=True)
    p.add_argument("--n0", type=float, help="injected photons per run")
    p.add_argument("--repeats", type=int, help="independent runs for error bars (default 10)")
    p.add_argument("--completion", choices=("oracle-im", "zero-im"), help="rule for Im(chi)")
    p.set_defaults(func=cmd_emulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        files, resolved = args.func(args)
        if args.out is not None:
            _write_manifest(Path(args.out), args.command, resolved, files, args.threads)
    except UsageError as exc:
        print(f"asymwalk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WalkError, OSError, ArithmeticError) as exc:
        print(f"asymwalk {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
