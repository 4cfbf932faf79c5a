"""Writers for run artefacts: CSV series, snapshots, manifest, SVG and PNG figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .diagnostics import ConvergenceRow, DiagnosticsRecord


def fmt(x) -> str:
    """17 significant digits; round-trips through ``float``."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_series_csv(records: Iterable[DiagnosticsRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(DiagnosticsRecord.FIELDS)
        for r in records:
            w.writerow([fmt(v) for v in r.as_row()])


def write_snapshot_csv(x: np.ndarray, path) -> None:
    """Vertices in one-based order ``j = 1..J``; row ``j`` sits at ``rho = j/J``."""
    J = x.shape[0]
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(("j", "x1", "x2"))
        for j in range(1, J + 1):
            p = x[j % J]
            w.writerow((j, fmt(p[0]), fmt(p[1])))


def read_snapshot_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    x = data[:, 1:3]
    return np.roll(x, 1, axis=0)  # row j=J first, matching internal storage


def write_manifest(path, **payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


def write_table_csv(rows: Sequence[ConvergenceRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(("J", "pos_err", "eoc_pos", "vel_err", "eoc_vel"))
        for r in rows:
            w.writerow((
                r.J, fmt(r.pos_err), "" if r.eoc_pos is None else fmt(r.eoc_pos),
                fmt(r.vel_err), "" if r.eoc_vel is None else fmt(r.eoc_vel),
            ))


def format_table(rows: Sequence[ConvergenceRow]) -> str:
    """Human-readable table with 5 significant digits."""
    head = f"{'J':>5}  {'max ||x-x^m||_1h':>17}  {'EOC':>5}  {'max ||xdot-dx||_0h':>18}  {'EOC':>5}"
    lines = [head, "-" * len(head)]
    for r in rows:
        ep = "  ---" if r.eoc_pos is None else f"{r.eoc_pos:5.2f}"
        ev = "  ---" if r.eoc_vel is None else f"{r.eoc_vel:5.2f}"
        lines.append(f"{r.J:>5}  {r.pos_err:>17.4e}  {ep}  {r.vel_err:>18.4e}  {ev}")
    return "\n".join(lines) + "\n"


def write_radius_csv(t, r, rdot, path, extinct_last: bool = False) -> None:
    """Radius table; the ``extinct`` column flags a final row at the extinction time."""
    n = len(t)
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(("t", "r", "rdot", "extinct"))
        for i, row in enumerate(zip(t, r, rdot)):
            flag = int(extinct_last and i == n - 1)
            w.writerow([fmt(v) for v in row] + [flag])


def write_svg(curves: Sequence[np.ndarray], path, size: int = 600, pad: float = 0.05) -> None:
    """Overlay closed polylines in an equal-aspect viewBox fitted to all curves."""
    pts = np.concatenate(curves)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    lo = lo - pad * span
    span *= 1 + 2 * pad
    stroke = span / size
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{lo[0]:.6g} {-(lo[1] + span):.6g} {span:.6g} {span:.6g}">'
    ]
    n = len(curves)
    for i, x in enumerate(curves):
        shade = int(200 * (1 - i / max(n - 1, 1)))
        coords = " ".join(f"{p[0]:.6g},{-p[1]:.6g}" for p in x)
        parts.append(
            f'<polygon points="{coords}" fill="none" stroke="rgb({shade},{shade},255)" '
            f'stroke-width="{stroke:.4g}"/>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_curves(snapshots, path, title: str = "") -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    n = len(snapshots)
    cmap = plt.get_cmap("viridis")
    for i, s in enumerate(snapshots):
        x = np.vstack([s.x, s.x[:1]])
        ax.plot(x[:, 0], x[:, 1], lw=0.8, color=cmap(i / max(n - 1, 1)), label=f"t={s.t:.3g}")
    ax.set_aspect("equal")
    ax.set_title(title)
    if n <= 12:
        ax.legend(fontsize=6, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_series(records: Sequence[DiagnosticsRecord], path) -> None:
    plt = _pyplot()
    t = np.array([r.t for r in records])
    fig, (a1, a2) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
    a1.plot(t, [r.length for r in records], lw=1)
    a1.set_ylabel(r"$|\Gamma^m|$")
    a2.plot(t, [r.inv_kinf for r in records], lw=1)
    a2.set_ylabel(r"$1/K^m_\infty$")
    a2.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_convergence(rows: Sequence[ConvergenceRow], path) -> None:
    plt = _pyplot()
    h = np.array([1.0 / r.J for r in rows])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(h, [r.pos_err for r in rows], "o-", label="position, 1,h")
    ax.loglog(h, [r.vel_err for r in rows], "s-", label="velocity, 0,h")
    ax.loglog(h, h**2 * rows[0].pos_err / h[0] ** 2, "k--", lw=0.8, label=r"$O(h^2)$")
    ax.set_xlabel("h")
    ax.set_ylabel("max error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
