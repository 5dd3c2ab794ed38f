"""SVG overlays and CSV exports.

Lattice coordinates put vertex ``(height r, column j)`` at ``(j - 1, -(r - 1))``,
so the north boundary runs along y = 0 and rescaled curve points ``(X, Y)``
land at ``(n X, n Y)`` with ``n`` one less than the number of paths.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence, TextIO

import numpy as np

from .arctic.branches import CurveBranch
from .model import ColoredConfig

DEFAULT_STYLE = {
    "unit": 6.0,  # pixels per lattice unit
    "margin": 2.0,  # lattice units
    "path_width": 1.2,
    "curve_width": 1.6,
    "curve_color": "#000000",
    "conjectural_color": "#777777",
    "background": "#ffffff",
}


def path_color(c: int, n: int) -> str:
    """Rainbow by color index: 1 is blue and n is red, through green and orange."""
    s = 0.0 if n <= 1 else (n - c) / (n - 1)
    hue = 240.0 * s**1.5
    return f"hsl({hue:.1f},85%,45%)"


def path_polyline(cfg: ColoredConfig, c: int) -> list[tuple[float, float]]:
    """Lattice-coordinate corners of path ``c``, from its west entry to its north exit."""
    off = cfg.offsets[c - 1]
    pts = [(off - 0.5, -(c - 1.0))]
    for j in cfg.columns(c):
        lo, hi, east = cfg.span(c, j)
        pts.append((j - 1.0, -(hi - 1.0)))
        if lo != hi:
            pts.append((j - 1.0, -(lo - 1.0)))
    pts.append((cfg.exits[c - 1] - 1.0, 0.5))
    return _dedupe(pts)


def _dedupe(pts):
    out = [pts[0]]
    for p in pts[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def curve_points(branch: CurveBranch, n: int) -> list[tuple[float, float]]:
    return [(n * float(x), n * float(y)) for x, y in zip(branch.X, branch.Y)]


def render_svg(
    cfg: ColoredConfig | None,
    curves: Sequence[CurveBranch] = (),
    style: dict | None = None,
    scale: int | None = None,
) -> str:
    """SVG document with colored paths and rescaled curves on top.

    ``scale`` multiplies curve coordinates; it defaults to one less than the
    number of paths of ``cfg`` (or 1 without a configuration).
    """
    st = dict(DEFAULT_STYLE)
    st.update(style or {})
    u, mg = st["unit"], st["margin"]
    n = scale if scale is not None else (max(1, cfg.n - 1) if cfg is not None else 1)

    paths = []
    if cfg is not None:
        for c in range(1, cfg.n + 1):
            paths.append((c, path_polyline(cfg, c)))
    lines = [(b, curve_points(b, n)) for b in curves]

    xs = [p[0] for _, pl in paths for p in pl] + [p[0] for _, pl in lines for p in pl]
    ys = [p[1] for _, pl in paths for p in pl] + [p[1] for _, pl in lines for p in pl]
    if not xs:
        xs, ys = [0.0], [0.0]
    x0, x1 = min(xs) - mg, max(xs) + mg
    y0, y1 = min(ys) - mg, max(ys) + mg
    width, height = (x1 - x0) * u, (y1 - y0) * u

    def fmt(pl):
        return " ".join(f"{(x - x0) * u:.3f},{(y1 - y) * u:.3f}" for x, y in pl)

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3f}" height="{height:.3f}" '
        f'viewBox="0 0 {width:.3f} {height:.3f}">\n'
    )
    out.write(f'<rect x="0" y="0" width="{width:.3f}" height="{height:.3f}" fill="{st["background"]}"/>\n')
    if paths:
        out.write(f'<g fill="none" stroke-width="{st["path_width"]}" stroke-linejoin="round">\n')
        for c, pl in paths:
            out.write(f'<polyline class="path" data-color="{c}" stroke="{path_color(c, cfg.n)}" points="{fmt(pl)}"/>\n')
        out.write("</g>\n")
    if lines:
        out.write(f'<g fill="none" stroke-width="{st["curve_width"]}">\n')
        for b, pl in lines:
            color = st["conjectural_color"] if b.conjectural else st["curve_color"]
            dash = ' stroke-dasharray="4,3"' if b.conjectural else ""
            out.write(f'<polyline class="curve" data-label="{b.label}" stroke="{color}"{dash} points="{fmt(pl)}"/>\n')
        out.write("</g>\n")
    out.write("</svg>\n")
    return out.getvalue()


# ---------------------------------------------------------------- CSV


def _num(v: float) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_snapshot_csv(cfgs: ColoredConfig | Iterable[ColoredConfig], f: TextIO) -> None:
    """Rows ``(color, column, height)``: every vertex visited by every path.

    Several configurations are separated by a leading ``snapshot`` column.
    """
    many = not isinstance(cfgs, ColoredConfig)
    cfgs = list(cfgs) if many else [cfgs]
    w = csv.writer(f, lineterminator="\n")
    w.writerow((["snapshot"] if many else []) + ["color", "column", "height"])
    for k, cfg in enumerate(cfgs):
        for c in range(1, cfg.n + 1):
            for j in cfg.columns(c):
                lo, hi, _ = cfg.span(c, j)
                for r in range(hi, lo - 1, -1):
                    w.writerow(([k] if many else []) + [c, j, r])


def read_snapshot_csv(f: TextIO, n: int, m: int) -> list[ColoredConfig]:
    """Inverse of :func:`write_snapshot_csv` for unslid configurations."""
    rows = list(csv.reader(f))
    head, body = rows[0], rows[1:]
    many = head[0] == "snapshot"
    groups: dict[int, dict[int, list[tuple[int, int]]]] = {}
    for row in body:
        vals = [int(v) for v in row]
        k = vals[0] if many else 0
        c, j, r = vals[-3:]
        groups.setdefault(k, {}).setdefault(c, []).append((j, r))
    out = []
    for k in sorted(groups):
        heights = []
        for c in range(1, n + 1):
            cells = groups[k][c]
            cols = sorted({j for j, _ in cells})
            # leaving height of each column except the last
            heights.append(tuple(min(r for jj, r in cells if jj == j) for j in cols[:-1]))
        out.append(ColoredConfig(n, m, tuple(heights)))
    return out


def write_occupancy_csv(v: np.ndarray, h: np.ndarray, f: TextIO) -> None:
    """Rows ``(row, col, v_mult_mean, h_mult_mean)``; rows count from the top."""
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["row", "col", "v_mult_mean", "h_mult_mean"])
    nr, nc = v.shape
    for r in range(nr):
        for j in range(nc):
            w.writerow([r + 1, j + 1, _num(v[r, j]), _num(h[r, j])])


def read_occupancy_csv(f: TextIO) -> tuple[np.ndarray, np.ndarray]:
    rows = list(csv.DictReader(f))
    nr = max(int(r["row"]) for r in rows)
    nc = max(int(r["col"]) for r in rows)
    v = np.zeros((nr, nc))
    h = np.zeros((nr, nc))
    for r in rows:
        i, j = int(r["row"]) - 1, int(r["col"]) - 1
        v[i, j] = float(r["v_mult_mean"])
        h[i, j] = float(r["h_mult_mean"])
    return v, h


def write_curves_csv(branches: Iterable[CurveBranch], f: TextIO) -> None:
    """Rows ``(label, t, X, Y)`` in rescaled units."""
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["label", "t", "X", "Y"])
    for b in branches:
        for t, x, y in zip(b.t, b.X, b.Y):
            w.writerow([b.label, _num(t), _num(x), _num(y)])


def read_curves_csv(f: TextIO) -> list[tuple[str, np.ndarray, np.ndarray, np.ndarray]]:
    """Groups of consecutive rows with the same label, as ``(label, t, X, Y)``."""
    out: list = []
    for row in csv.DictReader(f):
        vals = (float(row["t"]), float(row["X"]), float(row["Y"]))
        if not out or out[-1][0] != row["label"] or _starts_new(out[-1], vals):
            out.append((row["label"], [], [], []))
        for lst, v in zip(out[-1][1:], vals):
            lst.append(v)
    return [(lab, np.array(t), np.array(x), np.array(y)) for lab, t, x, y in out]


def _starts_new(group, vals) -> bool:
    # two gap branches of the same label are adjacent only across different gaps
    ts = group[1]
    if len(ts) < 2:
        return False
    inc = ts[-1] >= ts[-2]
    return (vals[0] >= ts[-1]) != inc
