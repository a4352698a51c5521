"""CSV and SVG writers for trajectories."""

from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import ValidationError

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def csv_columns(d, n_max):
    return (["t"] + [f"lambda_{k}" for k in range(1, d + 1)] + [f"C_{n}" for n in range(1, n_max + 1)]
            + ["S_value", "H_value", "herm_residue", "analytic_err"])


def _fmt(x):
    return repr(float(x))


def emit_csv(trajectory, path, n_max=6, analytic_err=None):
    """Write one row per sample; floats use the shortest round-trip form."""
    d = trajectory.dim
    cols = csv_columns(d, n_max)
    ch = trajectory.channels
    missing = [c for c in cols[1:-1] if c not in ch]
    if missing:
        raise ValidationError(f"trajectory lacks channels {missing}")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i, t in enumerate(trajectory.times):
            row = [_fmt(t)] + [_fmt(ch[c][i]) for c in cols[1:-1]]
            row.append("" if analytic_err is None else _fmt(analytic_err[i]))
            w.writerow(row)
    return path


def read_csv(path):
    """Parse a file written by ``emit_csv`` into ``{column: list}``."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: [float(r[j]) if r[j] != "" else None for r in body] for j, name in enumerate(header)}


def resolve_channels(trajectory, selector):
    """Expand ``lambda`` and ``C`` group names; reject unknown channels."""
    if isinstance(selector, str):
        selector = [selector]
    names = []
    for s in selector:
        if s == "lambda":
            names += [f"lambda_{k}" for k in range(1, trajectory.dim + 1)]
        elif s == "C":
            names += sorted((c for c in trajectory.channels if c.startswith("C_")), key=lambda c: int(c[2:]))
        elif s in trajectory.channels:
            names.append(s)
        else:
            raise ValidationError(f"unknown channel {s!r}; known: {sorted(trajectory.channels)}")
    return names


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def emit_svg(trajectory, selector, path, width=720, height=420, max_points=2000):
    """Static line chart of the selected channels against time."""
    if len(trajectory) == 0:
        raise ValidationError("cannot plot an empty trajectory")
    names = resolve_channels(trajectory, selector)
    t = np.asarray(trajectory.times, dtype=float)
    stride = max(1, int(np.ceil(len(t) / max_points)))
    keep = np.unique(np.r_[np.arange(0, len(t), stride), len(t) - 1])
    ys = {n: np.asarray(trajectory.channels[n], dtype=float) for n in names}

    left, right, top, bottom = 80, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom
    ymin = min(float(v.min()) for v in ys.values())
    ymax = max(float(v.max()) for v in ys.values())
    if ymax - ymin < 1e-12 * max(1.0, abs(ymax)):
        pad = 0.05 * max(abs(ymax), 1e-3)
        ymin, ymax = ymin - pad, ymax + pad
    t0, t1 = float(t[0]), float(t[-1])
    if t1 == t0:
        t1 = t0 + 1.0

    def sx(x):
        return left + pw * (x - t0) / (t1 - t0)

    def sy(y):
        return top + ph * (1.0 - (y - ymin) / (ymax - ymin))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for x in _ticks(t0, t1):
        X = sx(x)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{x:.4g}</text>')
    for y in _ticks(ymin, ymax):
        Y = sy(y)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{y:.6g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">t</text>')
    for j, name in enumerate(names):
        color = COLORS[j % len(COLORS)]
        pts = " ".join(f"{sx(t[i]):.3f},{sy(ys[name][i]):.3f}" for i in keep)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}">'
                   f'<title>{escape(name)}</title></polyline>')
        ly = top + 15 + 18 * j
        out.append(f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 40}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 45}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
