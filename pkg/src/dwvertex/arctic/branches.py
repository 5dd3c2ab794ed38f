"""Arctic-curve branches for touching paths.

Every branch is obtained from the curve of the non-intersecting image
(``nilp_point``) by a translation ``(X + dx, Y)`` or a shear followed by a
translation ``(X + Y + dx, Y)``:

* SW: shear, t in (-inf, 0]            (q: t in (-inf, 1])
* SE: translate by -1, t >= beta(1)    (q: t >= q**beta(1))
* around a gap at kappa, with t* the root of x0(t) = 1 between the two
  edges of the gap: translate by -kappa on the left part, shear then
  translate by -kappa on the right part.

For q != 1 the parameter is multiplicative (t = q**theta) and both
coordinates come out of logarithms. Branches for q < 1 are computed for
1/q on the reflected profile and mirrored about X = alpha(1)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from ..model import DomainError
from .profiles import DensityProfile, GapSpec
from .x0 import beta_ranges, moments, moments_q

DEFAULT_POINTS = 256

LABELS = ("SE", "SW", "gap-SW", "gap-SE", "tropical", "NILP", "conjectural-vertical")
_MIRROR = {"SE": "SW", "SW": "SE", "gap-SW": "gap-SE", "gap-SE": "gap-SW"}


@dataclass(eq=False)
class CurveBranch:
    """One parametric piece of an arctic curve in rescaled coordinates."""

    label: str
    t_range: tuple[float, float]
    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    transform: str = "identity"
    q: float = 1.0
    conjectural: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.label not in LABELS:
            raise DomainError(f"unknown branch label {self.label!r}")
        self.t = np.asarray(self.t, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if not (len(self.t) == len(self.X) == len(self.Y)):
            raise DomainError("branch arrays differ in length")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise DomainError(f"non-finite samples on branch {self.label}")

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.X, self.Y])

    def __len__(self):
        return len(self.t)

    def __repr__(self):
        return f"CurveBranch({self.label}, t in {self.t_range}, {len(self)} pts, {self.transform})"


# ---------------------------------------------------------------- point evaluators


def _g(a: float) -> float:
    # (1 - e^{-a}(1 + a)) / a^2
    if abs(a) < 0.1:
        return sum((-1) ** k * (k - 1) / math.factorial(k) * a ** (k - 2) for k in range(2, 22))
    return (-math.expm1(-a) - a * math.exp(-a)) / (a * a)


def _h(a: float) -> float:
    # (e^{-a} - 1 + a) / a^2
    if abs(a) < 0.1:
        return sum((-1) ** k / math.factorial(k) * a ** (k - 2) for k in range(2, 22))
    return (math.expm1(-a) + a) / (a * a)


def _nilp_q1(alpha: DensityProfile, t: float) -> tuple[float, float]:
    i1, i2 = moments(alpha, t)
    x = math.exp(-i1)
    om = -math.expm1(-i1)
    return t - om / i2, -om * om / (x * i2)


def _q_parts(alpha: DensityProfile, t: float, q: float) -> tuple[float, float, float]:
    """(x0', D1/t^2, D2/t^2) with D1 = t x0' + 1 - x0 and D2 = t x0' + x0 (1 - x0)."""
    i1, i2, j = moments_q(alpha, t, q)
    lq = math.log(q)
    a = lq * t * i1
    x = math.exp(-a)
    b = lq * i1
    d1 = b * b * _g(a) + x * lq * i2
    d2 = x * (lq * i2 - b * b * _h(a))
    return -lq * x * j, d1, d2


def _log_q(v: float, q: float) -> float:
    if not v > 0:
        raise DomainError("negative argument under q-logarithm (outside branch range)")
    return math.log(v) / math.log(q)


def nilp_point(alpha: DensityProfile, t: float, q: float = 1.0) -> tuple[float, float]:
    """Arctic point of the non-intersecting image at parameter ``t`` (analytic continuation)."""
    if q == 1.0:
        return _nilp_q1(alpha, t)
    xd, d1, d2 = _q_parts(alpha, t, q)
    return _log_q(xd / d2, q), _log_q(d2 / d1, q)


def shear_point(alpha: DensityProfile, t: float, q: float = 1.0) -> tuple[float, float]:
    """Shear ``(X + Y, Y)`` of ``nilp_point``."""
    if q == 1.0:
        x, y = _nilp_q1(alpha, t)
        return x + y, y
    xd, d1, d2 = _q_parts(alpha, t, q)
    return _log_q(xd / d1, q), _log_q(d2 / d1, q)


def limit_point(alpha: DensityProfile, q: float = 1.0) -> tuple[float, float]:
    """Common t -> +-infinity limit of the SE and SW branches."""
    if q == 1.0:
        return alpha.integral(), -1.0
    lq = math.log(q)
    m1 = 0.0
    for s in alpha.segments:
        if s.affine:
            k = lq * (s.slope + 1.0)
            m1 += math.exp(lq * (s.a0 + s.u0)) * math.expm1(k * (s.u1 - s.u0)) / k
        else:
            m1 += quad(lambda u, f=s.fn: q ** (u + f(u)), s.u0, s.u1, epsrel=1e-12)[0]
    return _log_q(lq * m1 / -math.expm1(-lq), q) - 1.0, -1.0


# ---------------------------------------------------------------- sampling


def _edge_slope(alpha: DensityProfile, te: float, q: float, side: int) -> Optional[float]:
    """beta-slope of the piece whose image ends at ``te`` on the approach side (None if not affine)."""
    for s, (lo, hi) in zip(alpha.segments, beta_ranges(alpha, q)):
        edge = hi if side > 0 else lo
        if math.isclose(edge, te, rel_tol=1e-13, abs_tol=1e-15):
            return s.slope + 1.0 if s.affine else None
    return None


def _on_poles(alpha: DensityProfile, t: float, q: float) -> bool:
    return any(lo <= t <= hi for lo, hi in beta_ranges(alpha, q))


def _edge_value(f: Callable[[float], tuple[float, float]], alpha, te, q, side, dx) -> tuple[float, float]:
    c = _edge_slope(alpha, te, q, side)
    if c is not None and c > 1.0 + 1e-9:
        # x0 vanishes or blows up like a fractional power: the point lands on the axis
        return (te if q == 1.0 else _log_q(te, q)) + dx, 0.0
    if c is None:
        return f(te + side * 1e-9 * max(1.0, abs(te)) * (1.0 if q == 1.0 else min(1.0, abs(math.log(q)))))
    # plateau next to the edge: the branch is smooth in the offset, so extrapolate
    h = 2e-5 * (max(1.0, abs(te)) if q == 1.0 else abs(te) * min(1.0, abs(math.log(q))))
    p1, p2, p4 = (f(te + k * side * h) for k in (1, 2, 4))
    return tuple((8 * a - 6 * b + c_) / 3 for a, b, c_ in zip(p1, p2, p4))


def _sample(
    alpha: DensityProfile,
    q: float,
    lo: float,
    hi: float,
    kind: str,
    dx: float,
    points: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if points < 2:
        raise DomainError("a branch needs at least two points")
    base = nilp_point if kind == "nilp" else shear_point

    def f(t):
        x, y = base(alpha, t, q)
        return x + dx, y

    s = np.linspace(0.0, 1.0, points)
    # for q != 1 the relevant spread of t near the edge is about |t_edge ln q|
    edge = hi if math.isinf(lo) else lo
    scale = 1.0 if q == 1.0 else max(abs(edge), 1e-300) * min(1.0, abs(math.log(q)))
    if math.isinf(hi):
        with np.errstate(divide="ignore"):
            ts = lo + scale * s / (1.0 - s)
        ts[-1] = math.inf
    elif math.isinf(lo):
        with np.errstate(divide="ignore"):
            ts = hi - scale * (1.0 - s) / s
        ts[0] = -math.inf
    else:
        ts = lo + (hi - lo) * s
        ts[-1] = hi
    X = np.empty(points)
    Y = np.empty(points)
    for i, t in enumerate(ts):
        if math.isinf(t):
            x, y = limit_point(alpha, q)
            x += dx + (1.0 if kind == "nilp" else 0.0)
        elif i in (0, points - 1) and _on_poles(alpha, t, q):
            x, y = _edge_value(f, alpha, t, q, 1 if i == 0 else -1, dx)
        else:
            x, y = f(t)
        X[i], Y[i] = x, y
    return ts, X, Y


# ---------------------------------------------------------------- q = 1 branches


def _beta_edges(alpha: DensityProfile, gap: GapSpec) -> tuple[float, float]:
    return alpha.left(gap.kappa) + gap.kappa, alpha(gap.kappa) + gap.kappa


def _match_gap(alpha: DensityProfile, g: GapSpec) -> GapSpec:
    for h in alpha.gaps():
        if abs(h.kappa - g.kappa) < 1e-9 and abs(h.mu - g.mu) < 1e-9:
            return h
    raise DomainError(f"profile has no jump of size {g.mu} at {g.kappa}")


def _range(q: float, lo: float, hi: float) -> tuple[float, float]:
    if q == 1.0:
        return lo, hi
    return (q**lo if not math.isinf(lo) else lo), (q**hi if not math.isinf(hi) else hi)


def branch_SE(alpha: DensityProfile, points: int = DEFAULT_POINTS, q: float = 1.0) -> CurveBranch:
    """SE branch: the non-intersecting curve translated by (-1, 0)."""
    lo = alpha.total + 1.0
    lo = lo if q == 1.0 else q**lo
    ts, X, Y = _sample(alpha, q, lo, math.inf, "nilp", -1.0, points)
    return CurveBranch("SE", (lo, math.inf), ts, X, Y, "translate(-1)", q)


def branch_SW(
    alpha: DensityProfile, points: int = DEFAULT_POINTS, q: float = 1.0, parametrization: str = "shear"
) -> CurveBranch:
    """SW branch.

    ``parametrization="shear"`` samples the sheared non-intersecting curve on
    t <= 0 (t <= 1 for q != 1). ``"x1"`` (q = 1 only) uses x1(t), which is x0
    of the reflected profile, on t >= alpha(1) + 1.
    """
    if parametrization == "x1":
        if q != 1.0:
            raise DomainError("the x1 parametrization is implemented for q = 1")
        top = alpha.total
        se = branch_SE(alpha.reflected(), points)
        return CurveBranch("SW", se.t_range, se.t, top - se.X, se.Y, "x1", 1.0, meta={"parametrization": "x1"})
    if parametrization != "shear":
        raise DomainError(f"unknown parametrization {parametrization!r}")
    hi = 0.0 if q == 1.0 else 1.0
    ts, X, Y = _sample(alpha, q, -math.inf, hi, "shear", 0.0, points)
    return CurveBranch("SW", (-math.inf, hi), ts, X, Y, "shear", q)


def branch_NILP(alpha: DensityProfile, side: str = "SE", points: int = DEFAULT_POINTS, q: float = 1.0) -> CurveBranch:
    """Curve of the non-intersecting image, with beta = alpha + u.

    ``side="SE"`` covers t >= beta(1), ``side="SW"`` covers t <= beta(0) = 0.
    """
    if side == "SE":
        lo = alpha.total + 1.0
        rng = (lo if q == 1.0 else q**lo, math.inf)
    elif side == "SW":
        rng = (-math.inf, 0.0 if q == 1.0 else 1.0)
    else:
        raise DomainError("side must be 'SE' or 'SW'")
    ts, X, Y = _sample(alpha, q, rng[0], rng[1], "nilp", 0.0, points)
    return CurveBranch("NILP", rng, ts, X, Y, "identity", q, meta={"side": side})


def find_tstar(alpha: DensityProfile, g: GapSpec, q: Optional[float] = None) -> float:
    """Root of x0(t) = 1 (x0^q(t) = 1) strictly inside the gap, by bisection."""
    g = _match_gap(alpha, g)
    q = 1.0 if q is None else float(q)
    lo, hi = _range(q, *_beta_edges(alpha, g))
    if q < 1.0:
        lo, hi = hi, lo

    def F(t):
        return moments(alpha, t)[0] if q == 1.0 else moments_q(alpha, t, q)[0]

    a, b = lo, hi
    # F decreases from +inf to -inf on (lo, hi)
    for _ in range(400):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        v = F(mid)
        if v == 0.0:
            return mid
        if v > 0:
            a = mid
        else:
            b = mid
    t = 0.5 * (a + b)
    if not (lo < t < hi):
        raise ArithmeticError("bisection left the gap interval")
    return t


def gap_branches(
    alpha: DensityProfile, g: GapSpec, points: int = DEFAULT_POINTS, q: float = 1.0
) -> tuple[CurveBranch, CurveBranch]:
    """Left (gap-SW) and right (gap-SE) branches attached to the gap ``g``."""
    g = _match_gap(alpha, g)
    lo, hi = _range(q, *_beta_edges(alpha, g))
    ts = find_tstar(alpha, g, q)
    k = g.kappa
    t1, X1, Y1 = _sample(alpha, q, lo, ts, "nilp", -k, points)
    t2, X2, Y2 = _sample(alpha, q, ts, hi, "shear", -k, points)
    meta = {"kappa": k, "mu": g.mu, "tstar": ts}
    left = CurveBranch("gap-SW", (lo, ts), t1, X1, Y1, f"translate({-k:g})", q, meta=dict(meta))
    right = CurveBranch("gap-SE", (ts, hi), t2, X2, Y2, f"shear+translate({-k:g})", q, meta=dict(meta))
    return left, right


# ---------------------------------------------------------------- q branches


def _check_gaps(alpha: DensityProfile, gaps: Optional[Sequence[GapSpec]]) -> list[GapSpec]:
    found = alpha.gaps()
    if gaps is None:
        return found
    gaps = sorted(gaps, key=lambda g: g.kappa)
    for a, b in zip(gaps, gaps[1:]):
        if b.kappa <= a.kappa + 1e-12:
            raise DomainError("overlapping gaps")
    return [_match_gap(alpha, g) for g in gaps]


def _mirror(b: CurveBranch, top: float) -> CurveBranch:
    return CurveBranch(
        _MIRROR.get(b.label, b.label),
        b.t_range,
        b.t,
        top - b.X,
        b.Y,
        b.transform + "+mirror",
        b.q,
        b.conjectural,
        dict(b.meta, kappa=1.0 - b.meta["kappa"]) if "kappa" in b.meta else dict(b.meta),
    )


def _branches(alpha, q, gaps, points):
    out = [branch_SW(alpha, points, q)]
    for g in gaps:
        out.extend(gap_branches(alpha, g, points, q))
    out.append(branch_SE(alpha, points, q))
    return out


def q_branches(
    alpha: DensityProfile, q: float, gaps: Optional[Sequence[GapSpec]] = None, points: int = DEFAULT_POINTS
) -> list[CurveBranch]:
    """SW, gap pairs and SE for area weight ``q`` (q > 0, q != 1)."""
    if not q > 0 or q == 1.0:
        raise DomainError("q_branches needs q > 0 and q != 1")
    gaps = _check_gaps(alpha, gaps)
    if q > 1.0:
        return _branches(alpha, float(q), gaps, points)
    delta = alpha.reflected()
    mirrored = [_mirror(b, alpha.total) for b in _branches(delta, 1.0 / q, delta.gaps(), points)]
    order = {"SW": 0, "gap-SW": 1, "gap-SE": 1, "SE": 2}
    return sorted(mirrored, key=lambda b: (order[b.label], b.meta.get("kappa", 0.0), b.label != "gap-SW"))


def conjectural_verticals(alpha: DensityProfile, branches: Sequence[CurveBranch], points: int = 32) -> list[CurveBranch]:
    """Vertical segments below plateaus, down to the first branch they meet (not derived, flagged)."""
    out = []
    for u0, u1, v in alpha.plateaus():
        best = None
        for b in branches:
            for (x0_, y0_), (x1_, y1_) in zip(b.points[:-1], b.points[1:]):
                hit = None
                if abs(x0_ - v) < 1e-9:
                    hit = y0_
                elif abs(x1_ - v) < 1e-9:
                    hit = y1_
                elif (x0_ - v) * (x1_ - v) < 0:
                    hit = y0_ + (y1_ - y0_) * (v - x0_) / (x1_ - x0_)
                if hit is not None and hit < -1e-9 and (best is None or hit > best):
                    best = hit
        if best is None:
            continue
        ys = np.linspace(0.0, best, points)
        out.append(
            CurveBranch(
                "conjectural-vertical",
                (0.0, best),
                ys,
                np.full(points, v),
                ys,
                "identity",
                conjectural=True,
                meta={"plateau": (u0, u1), "normative": False},
            )
        )
    return out


def assemble_arctic(
    alpha: DensityProfile,
    q: Optional[float] = None,
    points: int = DEFAULT_POINTS,
    conjectural: bool = False,
) -> list[CurveBranch]:
    """All branches of the touching-path arctic curve for ``alpha``."""
    if q is None or q == 1.0:
        out = _branches(alpha, 1.0, alpha.gaps(), points)
    else:
        out = q_branches(alpha, q, points=points)
    if conjectural:
        out.extend(conjectural_verticals(alpha, out))
    return out


def tropical_curve(alpha: DensityProfile, points: int = DEFAULT_POINTS) -> CurveBranch:
    """q -> infinity limit: (alpha(t), -t) for t in [0, 1], knots included exactly."""
    ts = [float(t) for t in np.linspace(0.0, 1.0, points)]
    X, T = [], []
    grid = sorted(set(ts) | {s.u0 for s in alpha.segments} | {1.0})
    for t in grid:
        seg_end = [s for s in alpha.segments if s.u1 == t]
        seg_start = [s for s in alpha.segments if s.u0 == t]
        if seg_end:
            X.append(seg_end[0].a1)
            T.append(t)
        if seg_start and (not seg_end or seg_start[0].a0 != seg_end[0].a1):
            X.append(seg_start[0].a0)
            T.append(t)
        if not seg_end and not seg_start:
            X.append(alpha(t))
            T.append(t)
    T = np.array(T)
    return CurveBranch("tropical", (0.0, 1.0), T, np.array(X), -T, "identity", math.inf)
