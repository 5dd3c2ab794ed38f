"""Most likely trajectories of a single area-weighted free path."""

from __future__ import annotations

import math

import numpy as np

from ..model import DomainError
from .profiles import DensityProfile
from .x0 import x0, x0_q


def geodesic(lam: float, z: float, q: float, points: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Samples ``(x, y)`` of the geodesic from (0, 0) to (lam, z).

    y solves q^x A + q^(z - y) B = 1 with
    A = (q^z - 1)/(q^(lam+z) - 1) and B = (q^lam - 1)/(q^(lam+z) - 1);
    at q = 1 this is the straight segment.
    """
    if not (lam > 0 and z > 0 and q > 0):
        raise DomainError("geodesic needs lam, z, q > 0")
    x = np.linspace(0.0, lam, points)
    if q == 1.0:
        return x, z * x / lam
    lq = math.log(q)
    den = math.expm1(lq * (lam + z))
    A = math.expm1(lq * z) / den
    B = math.expm1(lq * lam) / den
    y = z - np.log((1.0 - np.exp(lq * x) * A) / B) / lq
    y[0], y[-1] = 0.0, z
    return x, y


def tangent_geodesic(
    alpha: DensityProfile, t: float, q: float, kappa: float = 0.0, x: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Member ``t`` of the tangent family (1 - x0) q^(kappa + x) + t x0 q^(-y) = t.

    Returns ``(x, y)`` over the abscissae where the family is defined; at
    q = 1 the family degenerates to the lines (1 - x0) (kappa + x - t) = x0 y.
    """
    if x is None:
        x = np.linspace(-1.0, alpha.total + 1.0, 2001)
    x = np.asarray(x, dtype=float)
    if q == 1.0:
        v, _ = x0(alpha, t)
        return x, (1.0 - v) * (kappa + x - t) / v
    v, _ = x0_q(alpha, t, q)
    lq = math.log(q)
    arg = (t - (1.0 - v) * np.exp(lq * (kappa + x))) / (t * v)
    ok = arg > 0
    return x[ok], -np.log(arg[ok]) / lq
