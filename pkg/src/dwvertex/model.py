"""Configurations and vertex weights for the colored and colorblind path models.

Conventions used throughout the package:

* Rows are counted top-to-bottom, ``1..n``; this is the "height" of a vertex.
  Row parameters ``x`` are indexed bottom-to-top, so height ``h`` uses
  ``x[n - h]`` (0-based), i.e. ``x_{n-h+1}``.
* Columns are counted left-to-right, ``1..m``.  A vertex in column ``j`` sits at
  abscissa ``j - 1``.
* Color ``c`` (1-based) enters from the west boundary at height ``c`` and leaves
  through the north boundary.  Color sets are integer bitmasks, color ``c``
  occupying bit ``c - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Iterable, Sequence, Union

Number = Union[int, float, Fraction]


class DomainError(ValueError):
    """Raised for arguments outside an operation's domain."""


# ---------------------------------------------------------------------------
# boundary data and parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundarySpec:
    """Exit data on the north boundary.

    Attributes:
        n: number of paths (and rows).
        exits: sorted ``(column, multiplicity)`` pairs, multiplicities summing to n.
        coloring: exit column of each color ``1..n`` when the boundary coloring
            is fixed, ``None`` for a free coloring.
    """

    n: int
    exits: tuple[tuple[int, int], ...]
    coloring: tuple[int, ...] | None = None

    def __post_init__(self):
        exits = tuple((int(c), int(k)) for c, k in self.exits)
        object.__setattr__(self, "exits", exits)
        if self.n < 1:
            raise DomainError("need at least one path")
        if not exits:
            raise DomainError("exit list is empty")
        cols = [c for c, _ in exits]
        if any(c < 1 for c in cols):
            raise DomainError("exit columns are 1-based")
        if any(b <= a for a, b in zip(cols, cols[1:])):
            raise DomainError("exit columns must be strictly increasing")
        if any(k < 1 for _, k in exits):
            raise DomainError("exit multiplicities must be >= 1")
        if sum(k for _, k in exits) != self.n:
            raise DomainError(
                f"exit multiplicities sum to {sum(k for _, k in exits)}, expected n={self.n}"
            )
        if self.coloring is not None:
            col = tuple(int(e) for e in self.coloring)
            object.__setattr__(self, "coloring", col)
            if sorted(col) != list(self.exit_columns):
                raise DomainError("coloring is not a rearrangement of the exit multiset")

    @property
    def m(self) -> int:
        """Number of columns: the rightmost exit column."""
        return self.exits[-1][0]

    @property
    def exit_columns(self) -> tuple[int, ...]:
        """The exit multiset as a sorted tuple of columns."""
        return tuple(c for c, k in self.exits for _ in range(k))

    def colorings(self):
        """Iterate over admissible exit colorings (exit column per color)."""
        if self.coloring is not None:
            yield self.coloring
            return
        yield from sorted(set(permutations(self.exit_columns)))

    @classmethod
    def dwbc(cls, n: int) -> "BoundarySpec":
        return cls(n, tuple((c, 1) for c in range(1, n + 1)))

    @classmethod
    def from_columns(cls, columns: Iterable[int], coloring=None) -> "BoundarySpec":
        cols = sorted(int(c) for c in columns)
        exits: dict[int, int] = {}
        for c in cols:
            exits[c] = exits.get(c, 0) + 1
        return cls(len(cols), tuple(exits.items()), coloring)

    @classmethod
    def from_endpoints(cls, a: Sequence[int]) -> "BoundarySpec":
        """Boundary whose paths end at abscissas ``a_0 <= a_1 <= ...``."""
        return cls.from_columns(ai + 1 for ai in a)

    def endpoints(self) -> tuple[int, ...]:
        return tuple(c - 1 for c in self.exit_columns)


@dataclass(frozen=True)
class WeightParams:
    """Row weights ``x_1..x_n`` (bottom-to-top), interaction ``t``, area weight ``q``."""

    x: tuple
    t: Number = 0
    q: Number = 1

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        if any(xi <= 0 for xi in self.x):
            raise DomainError("row weights must be positive")
        if self.t < 0:
            raise DomainError("t must be >= 0")
        if self.q <= 0:
            raise DomainError("q must be > 0")

    @classmethod
    def uniform(cls, n: int, t: Number = 0, q: Number = 1, x: Number = 1) -> "WeightParams":
        return cls((x,) * n, t, q)

    def x_at(self, h: int) -> Number:
        """Row weight of the vertices at height ``h`` (top-to-bottom)."""
        return self.x[len(self.x) - h]

    def exact(self) -> "WeightParams":
        """Same parameters as exact rationals."""
        return WeightParams(
            tuple(Fraction(v) for v in self.x), Fraction(self.t), Fraction(self.q)
        )


# ---------------------------------------------------------------------------
# vertex weights
# ---------------------------------------------------------------------------


def colorset(colors: Iterable[int]) -> int:
    """Bitmask of a collection of 1-based colors."""
    mask = 0
    for c in colors:
        if c < 1:
            raise DomainError("colors are 1-based")
        mask |= 1 << (c - 1)
    return mask


def _as_mask(s) -> int:
    return s if isinstance(s, int) else colorset(s)


@lru_cache(maxsize=None)
def _gaussian_coefficients(a: int, b: int) -> tuple[int, ...]:
    # coefficients of the Gaussian polynomial [a choose b]_t, lowest degree first
    if b == 0 or b == a:
        return (1,)
    left = _gaussian_coefficients(a - 1, b - 1)
    right = _gaussian_coefficients(a - 1, b)
    out = [0] * (b * (a - b) + 1)
    for i, v in enumerate(left):
        out[i] += v
    for i, v in enumerate(right):
        out[i + b] += v
    return tuple(out)


def qbinom(a: int, b: int, t: Number) -> Number:
    """Gaussian binomial ``prod_{i=1}^b (1 - t^(a-b+i)) / (1 - t^i)``.

    Evaluated as a polynomial in ``t``, so ``t = 1`` gives the ordinary binomial
    and rational ``t`` stays exact.
    """
    if a < 0 or b < 0 or b > a:
        raise DomainError(f"qbinom needs 0 <= b <= a, got a={a}, b={b}")
    total = 0
    for coef in reversed(_gaussian_coefficients(a, b)):
        total = total * t + coef
    return total


def color_interaction(sN: int, sE: int) -> int:
    """Number of pairs ``i < j`` with ``i`` exiting east and ``j`` present."""
    present = sN | sE
    d = 0
    s = sE
    while s:
        low = s & -s
        i = low.bit_length()  # bit index + 1
        d += (present >> i).bit_count()
        s ^= low
    return d


def colored_vertex_weight(sW, sS, sN, sE, x: Number, t: Number) -> Number:
    """Colored vertex weight ``x^|sE| t^d(sN, sE)``, zero for invalid occupancies."""
    sW, sS, sN, sE = (_as_mask(s) for s in (sW, sS, sN, sE))
    if sW & sS or sN & sE or (sW | sS) != (sN | sE):
        return 0
    return x ** sE.bit_count() * t ** color_interaction(sN, sE)


def colorblind_vertex_weight(nW: int, nS: int, nN: int, nE: int, x: Number, t: Number) -> Number:
    if min(nW, nS, nN, nE) < 0:
        raise DomainError("edge multiplicities must be >= 0")
    if nW + nS != nN + nE:
        return 0
    return qbinom(nN + nE, nE, t) * t ** (nE * (nE - 1) // 2) * x ** nE


# ---------------------------------------------------------------------------
# configurations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ColoredConfig:
    """One up-right path per color, stored as east-step heights.

    Path ``c`` starts at height ``c`` in column ``offsets[c-1] + 1`` (entering
    from the west), steps east out of its local columns ``1..L`` at heights
    ``heights[c-1]`` and leaves through the north boundary in column
    ``exits[c-1] = offsets[c-1] + L + 1``.  Offsets are zero for the
    domain-wall model; the sliding map produces non-zero offsets.
    """

    n: int
    m: int
    heights: tuple[tuple[int, ...], ...]
    offsets: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "heights", tuple(tuple(int(h) for h in p) for p in self.heights))
        if not self.offsets:
            object.__setattr__(self, "offsets", (0,) * self.n)
        else:
            object.__setattr__(self, "offsets", tuple(int(o) for o in self.offsets))

    @property
    def exits(self) -> tuple[int, ...]:
        return tuple(o + len(h) + 1 for o, h in zip(self.offsets, self.heights))

    def validate(self, boundary: BoundarySpec | None = None) -> None:
        """Raise :class:`DomainError` unless the paths are well formed."""
        if len(self.heights) != self.n or len(self.offsets) != self.n:
            raise DomainError("need exactly one path per color")
        for c, (hs, off) in enumerate(zip(self.heights, self.offsets), start=1):
            prev = c
            for h in hs:
                if not 1 <= h <= prev:
                    raise DomainError(f"path {c} is not an up-right path: heights {hs}")
                prev = h
            if off < 0 or off + len(hs) + 1 > self.m:
                raise DomainError(f"path {c} leaves the {self.m}-column grid")
        if boundary is not None:
            if boundary.n != self.n:
                raise DomainError("boundary and configuration disagree on n")
            if tuple(sorted(self.exits)) != boundary.exit_columns:
                raise DomainError("exit multiset differs from the boundary")
            if boundary.coloring is not None and self.exits != boundary.coloring:
                raise DomainError("exit coloring differs from the fixed boundary coloring")

    def span(self, c: int, j: int):
        """``(lo, hi, east)`` of color ``c`` in absolute column ``j``, or None.

        The path occupies heights ``lo..hi`` of the column, entering at ``hi``
        and leaving at ``lo`` (eastwards if ``east``, else northwards).
        """
        off = self.offsets[c - 1]
        hs = self.heights[c - 1]
        local = j - off
        if local < 1 or local > len(hs) + 1:
            return None
        hi = c if local == 1 else hs[local - 2]
        if local == len(hs) + 1:
            return 1, hi, False
        return hs[local - 1], hi, True

    def columns(self, c: int) -> range:
        off = self.offsets[c - 1]
        return range(off + 1, off + len(self.heights[c - 1]) + 2)

    def vertex_sets(self) -> dict[tuple[int, int], list[int]]:
        """Map ``(height, column)`` to ``[sW, sS, sN, sE]`` for occupied vertices."""
        out: dict[tuple[int, int], list[int]] = {}
        for c in range(1, self.n + 1):
            bit = 1 << (c - 1)
            for j in self.columns(c):
                lo, hi, east = self.span(c, j)
                for r in range(lo, hi + 1):
                    s = out.setdefault((r, j), [0, 0, 0, 0])
                    s[0 if r == hi else 1] |= bit
                    s[3 if (r == lo and east) else 2] |= bit
        return out

    def vertical_steps(self, c: int):
        """Yield ``(column, count)`` of unit vertical steps of color ``c``."""
        for j in self.columns(c):
            lo, hi, _ = self.span(c, j)
            if hi > lo:
                yield j, hi - lo


@dataclass(frozen=True)
class ColorblindConfig:
    """Edge multiplicities of the colorblind model.

    ``vert[r-1][j-1]`` is the number of paths on the vertical edge above vertex
    ``(r, j)`` and ``horiz[r-1][j-1]`` the number on the horizontal edge to its
    east.  One path enters each row from the west.
    """

    n: int
    m: int
    vert: tuple[tuple[int, ...], ...]
    horiz: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "vert", tuple(tuple(int(v) for v in row) for row in self.vert))
        object.__setattr__(self, "horiz", tuple(tuple(int(v) for v in row) for row in self.horiz))

    def occupancy(self, r: int, j: int) -> tuple[int, int, int, int]:
        """``(nW, nS, nN, nE)`` at vertex ``(r, j)``."""
        nW = self.horiz[r - 1][j - 2] if j > 1 else 1
        nS = self.vert[r][j - 1] if r < self.n else 0
        return nW, nS, self.vert[r - 1][j - 1], self.horiz[r - 1][j - 1]

    def validate(self, boundary: BoundarySpec | None = None) -> None:
        if len(self.vert) != self.n or len(self.horiz) != self.n:
            raise DomainError("edge arrays must have n rows")
        if any(len(row) != self.m for row in self.vert + self.horiz):
            raise DomainError("edge arrays must have m columns")
        for r in range(1, self.n + 1):
            for j in range(1, self.m + 1):
                nW, nS, nN, nE = self.occupancy(r, j)
                if min(nN, nE) < 0 or nW + nS != nN + nE:
                    raise DomainError(f"flow not conserved at vertex {(r, j)}")
            if self.horiz[r - 1][self.m - 1] != 0:
                raise DomainError("paths may not leave through the east boundary")
        if boundary is not None:
            top = {j + 1: v for j, v in enumerate(self.vert[0]) if v}
            if tuple(sorted(top.items())) != boundary.exits:
                raise DomainError("north boundary does not match the exit data")

    @property
    def exits(self) -> tuple[tuple[int, int], ...]:
        return tuple((j + 1, v) for j, v in enumerate(self.vert[0]) if v)


# ---------------------------------------------------------------------------
# configuration-level quantities
# ---------------------------------------------------------------------------


def config_area(cfg: ColoredConfig | ColorblindConfig) -> int:
    """Total area: every unit vertical step weighs its distance to the west.

    For a colored path the distance is measured from the path's own starting
    column, which is the west boundary unless the path was slid.
    """
    if isinstance(cfg, ColorblindConfig):
        return sum(
            cfg.vert[r][j] * j for r in range(1, cfg.n) for j in range(cfg.m)
        )
    area = 0
    for c in range(1, cfg.n + 1):
        off = cfg.offsets[c - 1]
        for j, k in cfg.vertical_steps(c):
            area += (j - 1 - off) * k
    return area


def config_weight(cfg: ColoredConfig | ColorblindConfig, params: WeightParams) -> Number:
    """Product of vertex weights times ``q^Area``."""
    if len(params.x) != cfg.n:
        raise DomainError(f"need {cfg.n} row weights, got {len(params.x)}")
    cfg.validate()
    w: Number = 1
    if isinstance(cfg, ColorblindConfig):
        for r in range(1, cfg.n + 1):
            xr = params.x_at(r)
            for j in range(1, cfg.m + 1):
                w *= colorblind_vertex_weight(*cfg.occupancy(r, j), xr, params.t)
    else:
        for (r, _), (sW, sS, sN, sE) in cfg.vertex_sets().items():
            w *= colored_vertex_weight(sW, sS, sN, sE, params.x_at(r), params.t)
    if params.q != 1:
        w *= params.q ** config_area(cfg)
    return w


def colored_to_colorblind(cfg: ColoredConfig) -> ColorblindConfig:
    """Forget colors: count the paths on each edge."""
    vert = [[0] * cfg.m for _ in range(cfg.n)]
    horiz = [[0] * cfg.m for _ in range(cfg.n)]
    for (r, j), (_, _, sN, sE) in cfg.vertex_sets().items():
        vert[r - 1][j - 1] = sN.bit_count()
        horiz[r - 1][j - 1] = sE.bit_count()
    return ColorblindConfig(cfg.n, cfg.m, tuple(map(tuple, vert)), tuple(map(tuple, horiz)))


def is_touching(cfg: ColoredConfig) -> bool:
    """True for t=0 support: paths ordered by color, no shared horizontal edge.

    Equivalently the configuration carries no power of ``t``.
    """
    for c in range(1, cfg.n):
        upper, lower = cfg.heights[c - 1], cfg.heights[c]
        if cfg.offsets[c - 1] or cfg.offsets[c]:
            return False
        if len(upper) > len(lower):
            return False
        if any(hu >= hl for hu, hl in zip(upper, lower)):
            return False
    return True
