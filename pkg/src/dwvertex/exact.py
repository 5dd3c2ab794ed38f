"""Brute-force enumeration and closed-form partition functions."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import comb, prod
from typing import Iterator, Sequence

from .model import (
    BoundarySpec,
    ColorblindConfig,
    ColoredConfig,
    DomainError,
    WeightParams,
    config_weight,
)

DEFAULT_CAP = 5
MAX_PERMANENT = 20


class EnumerationRefused(DomainError):
    """The requested state space is too large to enumerate."""


def _path_heights(c: int, steps: int) -> list[tuple[int, ...]]:
    # nonincreasing sequences in [1, c] of the given length
    return [tuple(sorted(s, reverse=True)) for s in combinations_with_replacement(range(1, c + 1), steps)]


def colored_state_estimate(b: BoundarySpec) -> int:
    """Number of colored configurations summed over admissible colorings."""
    return sum(
        prod(comb(e - 1 + c - 1, e - 1) for c, e in enumerate(sigma, start=1))
        for sigma in b.colorings()
    )


def _enumerate_colored(b: BoundarySpec) -> Iterator[ColoredConfig]:
    for sigma in b.colorings():
        choices = [_path_heights(c, e - 1) for c, e in enumerate(sigma, start=1)]
        for hs in product(*choices):
            yield ColoredConfig(b.n, b.m, hs)


def _enumerate_colorblind(b: BoundarySpec) -> Iterator[ColorblindConfig]:
    n, m = b.n, b.m
    top = dict(b.exits)

    def column(inflow):
        # split each row's total into north/east, bottom row first
        def rec(r, from_south, vert, horiz):
            if r == 0:
                yield tuple(vert), tuple(horiz)
                return
            total = inflow[r - 1] + from_south
            for east in range(total + 1):
                north = total - east
                vert[r - 1], horiz[r - 1] = north, east
                yield from rec(r - 1, north, vert, horiz)

        yield from rec(n, 0, [0] * n, [0] * n)

    def walk(j, inflow, cols_v, cols_h):
        if j > m:
            vert = tuple(tuple(col[r] for col in cols_v) for r in range(n))
            horiz = tuple(tuple(col[r] for col in cols_h) for r in range(n))
            yield ColorblindConfig(n, m, vert, horiz)
            return
        for v, h in column(inflow):
            if v[0] != top.get(j, 0):
                continue
            if j == m and any(h):
                continue
            yield from walk(j + 1, h, cols_v + [v], cols_h + [h])

    yield from walk(1, (1,) * n, [], [])


def enumerate_configs(b: BoundarySpec, mode: str = "colored", cap: int = DEFAULT_CAP):
    """Yield every configuration with boundary ``b``.

    ``mode`` is ``"colored"`` or ``"colorblind"``.  A free boundary coloring
    runs over all rearrangements of the exit multiset.
    """
    if mode not in ("colored", "colorblind"):
        raise DomainError(f"unknown mode {mode!r}")
    if b.n > cap:
        raise EnumerationRefused(
            f"n={b.n} exceeds the enumeration cap {cap}; "
            f"about {colored_state_estimate(b)} colored configurations"
        )
    if mode == "colored":
        return _enumerate_colored(b)
    return _enumerate_colorblind(b)


def brute_force_Z(b: BoundarySpec, p: WeightParams, mode: str = "colored", cap: int = DEFAULT_CAP):
    """Sum of configuration weights over the full enumeration."""
    return sum(config_weight(cfg, p) for cfg in enumerate_configs(b, mode, cap))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def complete_homogeneous(m: int, xs: Sequence) -> object:
    """``h_m(xs)``, the sum of all degree-``m`` monomials."""
    if m < 0:
        raise DomainError("degree must be >= 0")
    h = [1] + [0] * m
    for x in xs:
        for k in range(1, m + 1):
            h[k] = h[k] + x * h[k - 1]
    return h[m]


def Z_t1_sigma(sigma: Sequence[int], xs: Sequence):
    """Partition function at ``t = 1`` with exit coloring ``sigma``.

    ``sigma[i-1]`` is the exit column of color ``i``.
    """
    n = len(xs)
    if len(sigma) != n:
        raise DomainError("coloring length differs from the number of rows")
    return prod((complete_homogeneous(s - 1, xs[n - i :]) for i, s in enumerate(sigma, start=1)), start=1)


def _permanent(a: list[list]) -> object:
    # Ryser's formula with Gray-code updates of the row sums
    n = len(a)
    if n == 0:
        return 1
    row_sums = [0] * n
    total = 0
    size = 0
    for g in range(1, 1 << n):
        flip = (g & -g).bit_length() - 1
        gray = g ^ (g >> 1)
        if gray >> flip & 1:
            size += 1
            for i in range(n):
                row_sums[i] += a[i][flip]
        else:
            size -= 1
            for i in range(n):
                row_sums[i] -= a[i][flip]
        term = prod(row_sums, start=1)
        total += term if (n - size) % 2 == 0 else -term
    return total


def permanent(a: Sequence[Sequence]) -> object:
    n = len(a)
    if any(len(row) != n for row in a):
        raise DomainError("permanent needs a square matrix")
    if n > MAX_PERMANENT:
        raise DomainError(f"permanent limited to n <= {MAX_PERMANENT}")
    return _permanent([list(r) for r in a])


def Z_t1_free(xs: Sequence):
    """Free-coloring partition function at ``t = 1``: a permanent of ``h``'s."""
    n = len(xs)
    if n < 1:
        raise DomainError("need at least one row")
    mat = [[complete_homogeneous(j - 1, xs[n - i :]) for j in range(1, n + 1)] for i in range(1, n + 1)]
    return permanent(mat)


def Z_t0(xs: Sequence):
    """Free-coloring partition function at ``t = 0``."""
    n = len(xs)
    return prod((xs[i] + xs[j] for i in range(n) for j in range(i + 1, n)), start=1)


def _check_endpoints(a: Sequence[int]) -> tuple[int, ...]:
    a = tuple(int(v) for v in a)
    if not a:
        raise DomainError("empty endpoint sequence")
    if a[0] < 0:
        raise DomainError("endpoints must be >= 0")
    if any(y < x for x, y in zip(a, a[1:])):
        raise DomainError("endpoints must be nondecreasing")
    return a


def Z_endpoints_t0(a: Sequence[int]) -> Fraction:
    """Number of touching configurations ending at abscissas ``a_0 <= ... <= a_n``.

    Computed as a Vandermonde ratio in exact arithmetic; the result is an integer.
    """
    a = _check_endpoints(a)
    b = [ai + i for i, ai in enumerate(a)]
    out = Fraction(1)
    for i in range(len(b)):
        for j in range(i + 1, len(b)):
            out *= Fraction(b[j] - b[i], j - i)
    return out


def Z_endpoints_q_ratio(a: Sequence[int], k: int, r: int, q: float) -> float:
    """Ratio of area-weighted partition functions after moving endpoint ``k`` by ``r``.

    Both boundaries use the endpoints ``a`` except that ``a_k`` becomes
    ``a_k + r``.  The normalization common to both cancels.
    """
    if q <= 0:
        raise DomainError("q must be > 0")
    a = _check_endpoints(a)
    if not 0 <= k < len(a):
        raise DomainError("endpoint index out of range")
    moved = list(a)
    moved[k] += r
    _check_endpoints(moved)
    if r == 0:
        return 1.0
    b = [ai + i for i, ai in enumerate(a)]
    bk_new = b[k] + r
    if q == 1:
        out = Fraction(1)
        for i, bi in enumerate(b):
            if i != k:
                out *= Fraction(bk_new - bi, b[k] - bi)
        return float(out)
    out = 1.0
    for i, bi in enumerate(b):
        if i != k:
            out *= (q ** bk_new - q ** bi) / (q ** b[k] - q ** bi)
    return out
