"""Command-line front end: ``evolve``, ``converge``, ``exact-circle`` and ``presets``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import report
from .config import PRESETS, TABLE1_LEVELS, RunConfig, get_preset, load_config
from .diagnostics import ConvergenceRow, convergence_level, fill_eoc
from .errors import ConfigError, ExtinctBefore, FlowError
from .model import (
    circle_radius_exact_v0,
    circle_radius_ode,
    circle_rdot_exact_v0,
    extinction_time,
)
from .runner import run_flow

EXIT_OK = 0
EXIT_ABORT = 2
EXIT_CONFIG = 3

log = logging.getLogger("hcflow")


def run_evolve(cfg: RunConfig, out_dir=None, figures: bool = True) -> int:
    """Run ``cfg`` and write series, snapshots, manifest and figures.

    Returns the process exit status: 0 if the run reached ``T``, 2 if it
    ended early for any reason. The manifest is written in both cases.
    """
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = cfg.params()
    t0 = time.perf_counter()
    try:
        result = run_flow(cfg.curve, params)
        reason, detail = result.reason, result.detail
    except FlowError as exc:
        # linear algebra failures: report as a degenerate configuration
        result, reason, detail = None, "DegenerateSegment", f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t0

    manifest = {
        "config": cfg.to_dict(),
        "termination_reason": reason,
        "detail": detail,
        "final_time": result.final_time if result else 0.0,
        "trip_time": result.trip_time if result else None,
        "steps": result.systems_solved if result else 0,
        "wall_time_s": round(wall, 3),
        "qualitative": cfg.qualitative,
    }
    if cfg.qualitative:
        manifest["note"] = "qualitative reproduction: initial curve formula chosen here"
    if result is not None:
        report.write_series_csv(result.records, out / "series.csv")
        for s in result.snapshots:
            report.write_snapshot_csv(s.x, out / f"snap_{s.m}.csv")
        manifest["snapshots"] = [f"snap_{s.m}.csv" for s in result.snapshots]
        if figures and result.snapshots:
            report.write_svg([s.x for s in result.snapshots], out / "curves.svg")
            report.plot_curves(result.snapshots, out / "curves.png",
                               title=f"V0={params.V0:g}, beta={params.beta:g}")
            report.plot_series(result.records, out / "series.png")
    report.write_manifest(out / "manifest.json", **manifest)
    print(f"{reason} at t={manifest['final_time']:.6g} {detail}".rstrip())
    return EXIT_OK if reason == "ReachedT" else EXIT_ABORT


def run_converge(levels, out_dir, T: float = 1.0, workers: int | None = None) -> int:
    """Run the reference benchmark at each level and write the error table.

    A failing level is reported and skipped; the remaining rows are still written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    levels = sorted(set(int(J) for J in levels))
    rows: list[ConvergenceRow] = []
    failed = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {J: pool.submit(convergence_level, J, T) for J in levels}
        for J, fut in futures.items():
            try:
                rows.append(fut.result())
            except FlowError as exc:
                failed.append(J)
                log.error("level J=%d failed: %s", J, exc)
    fill_eoc(rows)
    report.write_table_csv(rows, out / "table1.csv")
    text = report.format_table(rows)
    (out / "table1.txt").write_text(text)
    if len(rows) >= 2:
        report.plot_convergence(rows, out / "convergence.png")
    print(text, end="")
    return EXIT_ABORT if failed else EXIT_OK


def run_exact_circle(r0: float, V0: float, t_end: float, samples: int, out_path) -> int:
    """Tabulate ``(t, r, rdot)``; the closed form for ``V0 = 0``, the ODE otherwise.

    If the circle collapses before ``t_end`` the table stops at the
    extinction time and its last row carries ``extinct = 1``.
    """
    if not r0 > 0 or samples < 2 or not t_end > 0:
        raise ConfigError("need r0 > 0, t_end > 0 and samples >= 2")
    t = np.linspace(0.0, t_end, samples)
    extinct = False
    if V0 == 0:
        t_ext = extinction_time(r0)
        extinct = t_end >= t_ext
        t = t[t < t_ext]
        r = np.array([circle_radius_exact_v0(r0, ti) for ti in t])
        rdot = np.array([circle_rdot_exact_v0(r0, ti) for ti in t])
        if extinct:
            t, r, rdot = np.append(t, t_ext), np.append(r, 0.0), np.append(rdot, -math.inf)
    else:
        try:
            traj = circle_radius_ode(r0, V0, t_end, samples=samples)
        except ExtinctBefore as exc:
            traj, extinct = exc.trajectory, True
        t, r, rdot = traj.t, traj.r, traj.rdot
    report.write_radius_csv(t, r, rdot, out_path, extinct_last=extinct)
    if extinct:
        print(f"extinct at t={t[-1]:.10g}; table truncated")
    return EXIT_OK


def _levels(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hcflow", description="Hyperbolic curvature flow of closed curves.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="run one evolution")
    src = ev.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--config", type=Path)
    ev.add_argument("--out", type=Path, help="output directory (overrides the config)")
    ev.add_argument("--no-figures", action="store_true")

    cv = sub.add_parser("converge", help="convergence table on the reference solution")
    cv.add_argument("--levels", type=_levels, default=list(TABLE1_LEVELS))
    cv.add_argument("--T", type=float, default=1.0)
    cv.add_argument("--out", type=Path, default=Path("out/converge"))
    cv.add_argument("--workers", type=int, default=None)

    ec = sub.add_parser("exact-circle", help="radius of a circle under the flow")
    ec.add_argument("--r0", type=float, default=1.0)
    ec.add_argument("--v0", type=float, default=0.0)
    ec.add_argument("--t-end", type=float, required=True)
    ec.add_argument("--samples", type=int, default=101)
    ec.add_argument("--out", type=Path, default=Path("radius.csv"))

    pr = sub.add_parser("presets", help="list presets or dump one as JSON")
    pr.add_argument("name", nargs="?")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "evolve":
            cfg = get_preset(args.preset) if args.preset else load_config(args.config)
            if args.out is None and args.preset:
                args.out = Path(cfg.output_dir) / args.preset
            return run_evolve(cfg, args.out, figures=not args.no_figures)
        if args.command == "converge":
            return run_converge(args.levels, args.out, T=args.T, workers=args.workers)
        if args.command == "exact-circle":
            args.out.parent.mkdir(parents=True, exist_ok=True)
            return run_exact_circle(args.r0, args.v0, args.t_end, args.samples, args.out)
        if args.command == "presets":
            if args.name:
                from .config import dump_config

                print(dump_config(get_preset(args.name)))
            else:
                for name, cfg in PRESETS.items():
                    print(f"{name:20s} {cfg.curve.kind:17s} V0={cfg.V0:g} beta={cfg.beta:g} T={cfg.T:g}")
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_ABORT  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
