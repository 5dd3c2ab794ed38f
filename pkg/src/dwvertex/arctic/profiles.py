"""Rescaled exit-point distributions.

A profile is a non-decreasing function alpha on [0, 1] with alpha(0) = 0.
Pieces are affine (stored by their end values so knots are reproduced
exactly) or arbitrary monotone callables. Jumps between consecutive pieces
are gaps; flat affine pieces are plateaus (frozen outlets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from scipy.integrate import quad

from ..model import DomainError

TOL = 1e-12


@dataclass(frozen=True)
class Segment:
    u0: float
    u1: float
    a0: float
    a1: float
    fn: Optional[Callable[[float], float]] = None

    @property
    def affine(self) -> bool:
        return self.fn is None

    @property
    def slope(self) -> float:
        if not self.affine:
            raise DomainError("slope is only defined for affine pieces")
        return (self.a1 - self.a0) / (self.u1 - self.u0)

    @property
    def intercept(self) -> float:
        return self.a0 - self.slope * self.u0

    def __call__(self, u: float) -> float:
        if u == self.u0:
            return self.a0
        if u == self.u1:
            return self.a1
        if self.fn is not None:
            return float(self.fn(u))
        return self.a0 + (self.a1 - self.a0) * (u - self.u0) / (self.u1 - self.u0)

    def integral(self) -> float:
        if self.affine:
            return 0.5 * (self.a0 + self.a1) * (self.u1 - self.u0)
        return quad(self.fn, self.u0, self.u1, epsabs=1e-13, epsrel=1e-12, limit=200)[0]


@dataclass(frozen=True)
class GapSpec:
    """A jump of size ``mu`` in the profile at ``kappa``."""

    kappa: float
    mu: float

    def __post_init__(self):
        if not 0.0 < self.kappa < 1.0:
            raise DomainError(f"gap location {self.kappa} must lie in (0, 1)")
        if not self.mu > 0:
            raise DomainError(f"gap size {self.mu} must be positive")


class DensityProfile:
    def __init__(self, segments: Sequence[Segment]):
        segs = tuple(segments)
        if not segs:
            raise DomainError("profile needs at least one piece")
        if abs(segs[0].u0) > TOL or abs(segs[-1].u1 - 1.0) > TOL:
            raise DomainError("pieces must cover [0, 1]")
        if abs(segs[0].a0) > TOL:
            raise DomainError("profile must start at alpha(0) = 0")
        for s in segs:
            if not s.u1 > s.u0:
                raise DomainError(f"empty piece [{s.u0}, {s.u1}]")
            if not (math.isfinite(s.a0) and math.isfinite(s.a1)) or s.a1 < s.a0 - TOL:
                raise DomainError("profile must be finite and non-decreasing")
            if s.fn is not None:
                us = [s.u0 + (s.u1 - s.u0) * k / 64 for k in range(65)]
                vals = [s(u) for u in us]
                if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
                    raise DomainError("profile must be non-decreasing")
        for left, right in zip(segs, segs[1:]):
            if abs(left.u1 - right.u0) > TOL:
                raise DomainError("pieces must be contiguous")
            if right.a0 < left.a1 - TOL:
                raise DomainError("profile must be non-decreasing across pieces")
            if right.a0 - left.a1 > TOL and left.u1 >= 1.0 - TOL:
                raise DomainError("a gap must sit strictly inside (0, 1)")
        self.segments = segs

    # ------------------------------------------------------------ builders
    @classmethod
    def piecewise_linear(cls, points: Sequence[tuple[float, float]]) -> "DensityProfile":
        """Linear interpolation through ``(u, alpha)`` points.

        Repeating an abscissa introduces a jump: ``[(0, 0), (k, k), (k, k + m), (1, 1 + m)]``
        is the uniform profile with a gap of size ``m`` at ``k``.
        """
        pts = [(float(u), float(a)) for u, a in points]
        segs = []
        for (u0, a0), (u1, a1) in zip(pts, pts[1:]):
            if u1 < u0:
                raise DomainError("abscissae must be non-decreasing")
            if u1 > u0:
                segs.append(Segment(u0, u1, a0, a1))
            elif a1 < a0:
                raise DomainError("profile must be non-decreasing")
            elif a1 > a0 and (u0 <= TOL or u0 >= 1.0 - TOL):
                raise DomainError("a gap must sit strictly inside (0, 1)")
        return cls(_merge(segs))

    @classmethod
    def uniform(cls, p: float = 1.0) -> "DensityProfile":
        return cls([Segment(0.0, 1.0, 0.0, float(p))])

    @classmethod
    def with_gaps(cls, gaps: Sequence[tuple[float, float]], p: float = 1.0) -> "DensityProfile":
        """Slope-``p`` profile with jumps ``mu_i`` at locations ``kappa_i``."""
        pts = [(0.0, 0.0)]
        shift = 0.0
        last = 0.0
        for kappa, mu in sorted(gaps):
            if not last < kappa < 1.0 or mu <= 0:
                raise DomainError("gaps must be ordered, positive and inside (0, 1)")
            pts.append((kappa, p * kappa + shift))
            shift += mu
            pts.append((kappa, p * kappa + shift))
            last = kappa
        pts.append((1.0, p + shift))
        return cls.piecewise_linear(pts)

    @classmethod
    def clump(cls, kappa: float, lam: float, mu: float = 0.0) -> "DensityProfile":
        """Uniform profile with ``lam`` of the paths exiting at ``kappa``, optionally followed by a gap."""
        if not (0 < kappa and lam > 0 and kappa + lam < 1 and mu >= 0):
            raise DomainError("need 0 < kappa, 0 < lam, kappa + lam < 1")
        pts = [(0, 0), (kappa, kappa), (kappa + lam, kappa)]
        if mu:
            pts.append((kappa + lam, kappa + mu))
        pts.append((1, 1 - lam + mu))
        return cls.piecewise_linear(pts)

    @classmethod
    def frozen_ends(cls, kappa: float, lam: float) -> "DensityProfile":
        """Plateaus of widths ``kappa`` at the left end and ``lam`` at the right end."""
        if not (kappa > 0 and lam > 0 and kappa + lam < 1):
            raise DomainError("need kappa, lam > 0 and kappa + lam < 1")
        top = 1 - kappa - lam
        return cls.piecewise_linear([(0, 0), (kappa, 0), (1 - lam, top), (1, top)])

    @classmethod
    def from_function(
        cls, f: Callable[[float], float], breaks: Sequence[float] = (0.0, 1.0)
    ) -> "DensityProfile":
        """Monotone callable; jumps are allowed only at ``breaks``.

        At a break the left piece takes the left limit, estimated from
        ``f`` just below the break.
        """
        bs = sorted(set(float(b) for b in breaks) | {0.0, 1.0})
        segs = []
        for u0, u1 in zip(bs, bs[1:]):
            a0 = float(f(u0))
            a1 = float(f(u1)) if u1 == 1.0 else float(f(u1 - 1e-13 * max(1.0, u1)))
            segs.append(Segment(u0, u1, a0, a1, f))
        return cls(segs)

    # ------------------------------------------------------------ queries
    def _locate(self, u: float, left: bool) -> Segment:
        if not -TOL <= u <= 1 + TOL:
            raise DomainError(f"u = {u} outside [0, 1]")
        segs = self.segments
        for i, s in enumerate(segs):
            if u < s.u1 or (u == s.u1 and (left or i == len(segs) - 1)):
                return s
        return segs[-1]

    def __call__(self, u: float) -> float:
        """Right-continuous value."""
        return self._locate(u, left=False)(u)

    def left(self, u: float) -> float:
        """Left limit (equal to the value away from jumps)."""
        if u <= 0:
            return 0.0
        return self._locate(u, left=True)(u)

    @property
    def affine(self) -> bool:
        return all(s.affine for s in self.segments)

    @property
    def total(self) -> float:
        return self.segments[-1].a1

    def integral(self) -> float:
        return math.fsum(s.integral() for s in self.segments)

    def gaps(self) -> list[GapSpec]:
        out = []
        for left, right in zip(self.segments, self.segments[1:]):
            jump = right.a0 - left.a1
            if jump > TOL:
                out.append(GapSpec(left.u1, jump))
        return out

    def plateaus(self) -> list[tuple[float, float, float]]:
        return [(s.u0, s.u1, s.a0) for s in self.segments if s.affine and s.a1 == s.a0]

    def reflected(self) -> "DensityProfile":
        """delta(u) = alpha(1) - alpha(1 - u)."""
        top = self.total
        segs = []
        for s in reversed(self.segments):
            fn = None if s.fn is None else (lambda u, f=s.fn: top - f(1.0 - u))
            segs.append(Segment(1.0 - s.u1, 1.0 - s.u0, top - s.a1, top - s.a0, fn))
        return DensityProfile(segs)

    def __repr__(self):
        body = ", ".join(
            f"[{s.u0:g},{s.u1:g}]:{s.a0:g}->{s.a1:g}" + ("" if s.affine else "~") for s in self.segments
        )
        return f"DensityProfile({body})"


def _merge(segs: list[Segment]) -> list[Segment]:
    out: list[Segment] = []
    for s in segs:
        if out:
            p = out[-1]
            if p.affine and s.affine and p.a1 == s.a0:
                slope_p = (p.a1 - p.a0) / (p.u1 - p.u0)
                slope_s = (s.a1 - s.a0) / (s.u1 - s.u0)
                if abs(slope_p - slope_s) <= 1e-12 * max(1.0, abs(slope_p)):
                    out[-1] = Segment(p.u0, s.u1, p.a0, s.a1)
                    continue
        out.append(s)
    return out


def density_from_endpoints(a: Sequence[int], n: Optional[int] = None, gap_threshold: float = 0.1) -> DensityProfile:
    """Piecewise-linear profile through ``(i/n, a_i/n)``.

    With ``n`` omitted the scale is ``len(a) - 1``. A step exceeding the
    preceding one by more than ``gap_threshold * n`` becomes a jump whose
    size discounts the preceding spacing, so equally spaced blocks
    separated by a hole map to an exact gap.
    """
    a = [int(v) for v in a]
    if not a or a[0] < 0 or any(y < x for x, y in zip(a, a[1:])):
        raise DomainError("endpoints must be non-negative and non-decreasing")
    if a[0] != 0:
        raise DomainError("endpoints must start at 0")
    if len(a) == 1:
        return DensityProfile.uniform(0.0)
    n = len(a) - 1 if n is None else int(n)
    if n <= 0:
        raise DomainError("scale must be positive")
    pts = [(0.0, 0.0)]
    for i in range(len(a) - 1):
        d = a[i + 1] - a[i]
        u1 = (i + 1) / n
        ref = a[i] - a[i - 1] if i > 0 else d
        if d - ref > gap_threshold * n:
            pts.append((i / n, (a[i + 1] - ref) / n))
        pts.append((u1, a[i + 1] / n))
    if abs(pts[-1][0] - 1.0) > TOL:
        raise DomainError(f"{len(a)} endpoints do not span [0, 1] at scale {n}")
    pts[-1] = (1.0, pts[-1][1])
    return DensityProfile.piecewise_linear(pts)


def endpoints_from_density(alpha: DensityProfile, n: int) -> tuple[int, ...]:
    """Round ``n * alpha(i/n)`` (left limits at jumps) to a non-decreasing sequence."""
    if n <= 0:
        raise DomainError("n must be positive")
    out = []
    prev = 0
    for i in range(n + 1):
        v = alpha.left(i / n) if i else 0.0
        a = max(prev, math.floor(n * v + 0.5 + 1e-9))
        out.append(a)
        prev = a
    return tuple(out)
