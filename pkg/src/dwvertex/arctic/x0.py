"""The functions x0(t) and x0^q(t) attached to a density profile.

With beta(u) = alpha(u) + u and w(u) = q**beta(u) (w = beta when q = 1),
everything reduces to three integrals

    I1 = int du / (t - w),   I2 = int du / (t - w)**2,   J = I1 - t*I2,

evaluated in closed form on affine pieces and by adaptive quadrature on
callable pieces. Then

    x0(t)    = exp(-I1),           x0'(t)   = x0 * I2,
    x0^q(t)  = q**(-t*I1),         x0^q'(t) = -ln(q) * x0^q * J.
"""

from __future__ import annotations

import math

from scipy.integrate import quad

from ..model import DomainError
from .profiles import DensityProfile, Segment

_QUAD = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


def _check_q(q: float) -> float:
    if not q > 0:
        raise DomainError(f"q = {q} must be positive")
    return float(q)


def beta_ranges(alpha: DensityProfile, q: float = 1.0) -> list[tuple[float, float]]:
    """Closed intervals swept by w = q**beta on each piece."""
    out = []
    for s in alpha.segments:
        b0, b1 = s.a0 + s.u0, s.a1 + s.u1
        if q != 1.0:
            b0, b1 = q**b0, q**b1
        out.append((min(b0, b1), max(b0, b1)))
    return out


def _check_t(alpha: DensityProfile, t: float, q: float) -> None:
    if not math.isfinite(t):
        raise DomainError(f"t = {t} is not finite")
    for lo, hi in beta_ranges(alpha, q):
        if lo <= t <= hi:
            raise DomainError(f"t = {t} lies on the pole set [{lo}, {hi}]")


# ---------------------------------------------------------------- q = 1


def _moments_affine(s: Segment, t: float) -> tuple[float, float]:
    c = s.slope + 1.0
    du = s.u1 - s.u0
    d0 = t - (s.a0 + s.u0)
    d1 = t - (s.a1 + s.u1)
    return math.log1p(c * du / d1) / c, du / (d0 * d1)


def _moments_callable(s: Segment, t: float) -> tuple[float, float]:
    f = s.fn
    i1 = quad(lambda u: 1.0 / (t - u - f(u)), s.u0, s.u1, **_QUAD)[0]
    i2 = quad(lambda u: 1.0 / (t - u - f(u)) ** 2, s.u0, s.u1, **_QUAD)[0]
    return i1, i2


def moments(alpha: DensityProfile, t: float) -> tuple[float, float]:
    """(I1, I2) at q = 1."""
    _check_t(alpha, t, 1.0)
    i1 = i2 = 0.0
    for s in alpha.segments:
        a, b = _moments_affine(s, t) if s.affine else _moments_callable(s, t)
        i1 += a
        i2 += b
    return i1, i2


def x0(alpha: DensityProfile, t: float) -> tuple[float, float]:
    """Value and derivative of x0 at ``t``."""
    i1, i2 = moments(alpha, t)
    v = math.exp(-i1)
    return v, v * i2


# ---------------------------------------------------------------- q != 1

_SERIES_TERMS = 80


def _moments_q_affine(s: Segment, t: float, lq: float) -> tuple[float, float, float]:
    c = s.slope + 1.0
    k = lq * c
    du = s.u1 - s.u0
    e0 = lq * (s.a0 + s.u0)
    w0 = math.exp(e0)
    w1 = math.exp(lq * (s.a1 + s.u1))
    j = -(w1 - w0) / (k * (t - w1) * (t - w0))
    if abs(t) <= 0.5 * min(w0, w1):
        # expand 1/(t - w) in powers of t/w
        i1 = i2 = 0.0
        r = t / w0
        p = 1.0 / w0
        for m in range(_SERIES_TERMS):
            # p = t**m / w0**(m+1)
            i1 -= p * (-math.expm1(-(m + 1) * k * du)) / ((m + 1) * k)
            i2 += (m + 1) * (p / w0) * (-math.expm1(-(m + 2) * k * du)) / ((m + 2) * k)
            p *= r
            if p == 0.0:
                break
        return i1, i2, j
    i1 = (k * du - math.log1p((w0 - w1) / (t - w0))) / (k * t)
    i2 = (i1 - j) / t
    return i1, i2, j


def _moments_q_callable(s: Segment, t: float, q: float) -> tuple[float, float, float]:
    f = s.fn

    def w(u):
        return q ** (u + f(u))

    i1 = quad(lambda u: 1.0 / (t - w(u)), s.u0, s.u1, **_QUAD)[0]
    i2 = quad(lambda u: 1.0 / (t - w(u)) ** 2, s.u0, s.u1, **_QUAD)[0]
    j = quad(lambda u: -w(u) / (t - w(u)) ** 2, s.u0, s.u1, **_QUAD)[0]
    return i1, i2, j


def moments_q(alpha: DensityProfile, t: float, q: float) -> tuple[float, float, float]:
    """(I1, I2, J) with w = q**beta."""
    q = _check_q(q)
    if q == 1.0:
        i1, i2 = moments(alpha, t)
        return i1, i2, i1 - t * i2
    _check_t(alpha, t, q)
    lq = math.log(q)
    acc = [0.0, 0.0, 0.0]
    for s in alpha.segments:
        parts = _moments_q_affine(s, t, lq) if s.affine else _moments_q_callable(s, t, q)
        for i in range(3):
            acc[i] += parts[i]
    return acc[0], acc[1], acc[2]


def x0_q(alpha: DensityProfile, t: float, q: float) -> tuple[float, float]:
    """Value and derivative of x0^q at ``t`` for any q > 0, q != 1."""
    q = _check_q(q)
    if q == 1.0:
        raise DomainError("x0_q needs q != 1; use x0")
    i1, _, j = moments_q(alpha, t, q)
    lq = math.log(q)
    v = math.exp(-lq * t * i1)
    return v, -lq * v * j
