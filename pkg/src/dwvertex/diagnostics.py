"""Comparing sampled density fields with predicted curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from skimage.measure import find_contours

from .arctic.branches import CurveBranch


def level_set(field: np.ndarray, level: float = 0.5) -> list[np.ndarray]:
    """Contours of a ``(row, col)`` field in lattice coordinates ``(x, y) = (col - 1, -(row - 1))``.

    Entry ``field[r-1, j-1]`` belongs to the vertex at height ``r`` and column ``j``.
    """
    out = []
    for c in find_contours(np.asarray(field, dtype=float), level):
        out.append(np.column_stack([c[:, 1], -c[:, 0]]))
    return out


def _polylines(curves: Sequence[CurveBranch], scale: float) -> list[np.ndarray]:
    return [np.column_stack([scale * b.X, scale * b.Y]) for b in curves if not b.conjectural]


def _densify(pl: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Points along a polyline at most ``step`` apart, with the arc length each one stands for."""
    pts, wts = [], []
    for a, b in zip(pl[:-1], pl[1:]):
        d = float(np.hypot(*(b - a)))
        if d == 0:
            continue
        k = max(1, int(np.ceil(d / step)))
        s = (np.arange(k) + 0.5) / k
        pts.append(a + s[:, None] * (b - a))
        wts.append(np.full(k, d / k))
    if not pts:
        return np.zeros((0, 2)), np.zeros(0)
    return np.vstack(pts), np.concatenate(wts)


def _distance_to(points: np.ndarray, lines: list[np.ndarray]) -> np.ndarray:
    """Euclidean distance from each point to the nearest segment of ``lines``."""
    best = np.full(len(points), np.inf)
    for pl in lines:
        if len(pl) == 1:
            best = np.minimum(best, np.hypot(*(points - pl[0]).T))
            continue
        a, b = pl[:-1], pl[1:]
        ab = b - a
        L2 = np.einsum("ij,ij->i", ab, ab)
        L2[L2 == 0] = 1.0
        for chunk in range(0, len(points), 2048):
            p = points[chunk : chunk + 2048]
            ap = p[:, None, :] - a[None, :, :]
            s = np.clip(np.einsum("kij,ij->ki", ap, ab) / L2, 0.0, 1.0)
            proj = a[None, :, :] + s[..., None] * ab[None, :, :]
            d = np.hypot(*(p[:, None, :] - proj).transpose(2, 0, 1)).min(axis=1)
            best[chunk : chunk + 2048] = np.minimum(best[chunk : chunk + 2048], d)
    return best


@dataclass(frozen=True)
class BandReport:
    band: float
    level_set_fraction: float  # arc length of the level set inside the band
    curve_fraction: float  # arc length of the curve inside the band
    level_set_length: float
    curve_length: float
    max_distance: float


def band_agreement(
    field: np.ndarray,
    curves: Sequence[CurveBranch],
    scale: float,
    band: float,
    level: float = 0.5,
    step: float = 0.25,
) -> BandReport:
    """How much of the ``level`` contour of ``field`` lies within ``band`` (lattice units) of the curves."""
    contours = level_set(field, level)
    lines = _polylines(curves, scale)
    cps, cws = [], []
    for c in contours:
        p, w = _densify(c, step)
        cps.append(p)
        cws.append(w)
    cp = np.vstack(cps) if cps else np.zeros((0, 2))
    cw = np.concatenate(cws) if cws else np.zeros(0)
    lps, lws = [], []
    for pl in lines:
        p, w = _densify(pl, step)
        lps.append(p)
        lws.append(w)
    lp = np.vstack(lps) if lps else np.zeros((0, 2))
    lw = np.concatenate(lws) if lws else np.zeros(0)

    d1 = _distance_to(cp, lines) if len(cp) else np.zeros(0)
    d2 = _distance_to(lp, contours) if len(lp) and contours else np.full(len(lp), np.inf)
    f1 = float(cw[d1 <= band].sum() / cw.sum()) if cw.sum() else 0.0
    f2 = float(lw[d2 <= band].sum() / lw.sum()) if lw.sum() else 0.0
    return BandReport(
        band=band,
        level_set_fraction=f1,
        curve_fraction=f2,
        level_set_length=float(cw.sum()),
        curve_length=float(lw.sum()),
        max_distance=float(d1.max()) if len(d1) else float("inf"),
    )


_SWAP = {"SE": "SW", "SW": "SE", "gap-SE": "gap-SW", "gap-SW": "gap-SE"}


def branch_residuals(alpha, branches: Sequence[CurveBranch]) -> dict[str, float]:
    """Largest deviation of each branch from its defining formula, re-evaluated at the stored parameters.

    Keys are ``label`` (or ``label@kappa`` for gap branches). Endpoints are
    skipped: they are limits, not formula evaluations.
    """
    from .arctic.branches import nilp_point

    out: dict[str, float] = {}
    for b in branches:
        if b.label not in _SWAP:
            continue
        prof, label, flip, k = alpha, b.label, False, b.meta.get("kappa", 0.0)
        if b.transform.endswith("+mirror"):
            prof, label, flip, k = alpha.reflected(), _SWAP[b.label], True, 1.0 - k
        q = b.q if b.q is not None else 1.0
        worst = 0.0
        for t, X, Y in zip(b.t[1:-1], b.X[1:-1], b.Y[1:-1]):
            xn, yn = nilp_point(prof, float(t), q)
            if label == "SE":
                x = xn - 1.0
            elif label == "SW":
                x = xn + yn
            elif label == "gap-SW":
                x = xn - k
            else:
                x = xn + yn - k
            if flip:
                x = alpha.total - x
            worst = max(worst, abs(x - X), abs(yn - Y))
        key = b.label if "kappa" not in b.meta else f"{b.label}@{b.meta['kappa']:g}"
        out[key] = float(worst)
    return out
