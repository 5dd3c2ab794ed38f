"""Metropolis-Hastings chain on colored configurations.

Moves: with probability 1/3 each, a corner flip of one east step of color
``c`` in column ``k``, or a color swap of ``c`` with ``c + 1`` or ``c - 1``
starting from the vertex of column ``k`` where the two paths split.  The base
proposal is symmetric, so acceptance is the plain weight ratio.

The pure-Python functions here (:func:`propose`, :func:`acceptance_ratio`,
:func:`step`) mirror the compiled loop in :mod:`dwvertex._kernels` exactly;
:func:`run` uses the compiled loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from . import _kernels as K
from .model import (
    BoundarySpec,
    ColoredConfig,
    DomainError,
    WeightParams,
    color_interaction,
)

UNIFORMS_PER_STEP = 5
DEFAULT_BLOCK = 1 << 16


@dataclass(frozen=True)
class Flip:
    c: int
    k: int
    h_new: int


@dataclass(frozen=True)
class Swap:
    """Exchange colors ``east`` and ``north`` after their split vertex ``(row, k)``.

    ``meet`` is the column of the next common vertex, or 0 when the paths
    never meet again and the exit coloring changes.
    """

    c: int
    partner: int
    k: int
    row: int
    east: int
    north: int
    meet: int


Proposal = Union[Flip, Swap, None]


class ChainState:
    """Heights and exits in the padded layout used by the compiled loop."""

    def __init__(self, n: int, m: int, H: np.ndarray, E: np.ndarray):
        self.n, self.m = n, m
        self.H = H
        self.E = E

    @classmethod
    def from_config(cls, cfg: ColoredConfig) -> "ChainState":
        if any(cfg.offsets):
            raise DomainError("the chain runs on domain-wall type grids only")
        cfg.validate()
        n, m = cfg.n, cfg.m
        H = np.zeros((n + 1, m + 2), dtype=np.int64)
        E = np.zeros(n + 1, dtype=np.int64)
        for c in range(1, n + 1):
            H[c, 0] = c
            hs = cfg.heights[c - 1]
            H[c, 1 : len(hs) + 1] = hs
            E[c] = len(hs) + 1
        return cls(n, m, H, E)

    def config(self) -> ColoredConfig:
        hs = tuple(tuple(int(v) for v in self.H[c, 1 : self.E[c]]) for c in range(1, self.n + 1))
        return ColoredConfig(self.n, self.m, hs)

    def copy(self) -> "ChainState":
        return ChainState(self.n, self.m, self.H.copy(), self.E.copy())

    def span(self, c: int, j: int):
        lo, hi, east = K.span(self.H, self.E, c, j)
        return None if lo == 0 else (int(lo), int(hi), bool(east))

    def key(self) -> bytes:
        return self.H.tobytes() + self.E.tobytes()

    def __eq__(self, other):
        return isinstance(other, ChainState) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def initial_config(b: BoundarySpec) -> ChainState:
    """Each path runs east along its entry row, then north to its exit.

    Colors take the fixed boundary coloring if one is given, the identity
    otherwise.
    """
    cols = b.coloring if b.coloring is not None else b.exit_columns
    hs = tuple((c,) * (e - 1) for c, e in enumerate(cols, start=1))
    return ChainState.from_config(ColoredConfig(b.n, b.m, hs))


def flip_bounds(s: ChainState, c: int, k: int):
    """Allowed range ``(h0, h1)`` for the column-``k`` east step of path ``c``."""
    e = int(s.E[c])
    if not 1 <= k < e:
        return None
    h1 = int(s.H[c, k - 1])
    h0 = int(s.H[c, k + 1]) if k + 1 < e else 1
    return h0, h1


def find_color_swap(s: ChainState, c: int, k: int, dir: int):
    d = c + dir
    if dir not in (1, -1) or not 1 <= d <= s.n or not 1 <= k <= s.m:
        return None
    r, a, b = K.find_split(s.H, s.E, c, d, k)
    if r == 0:
        return None
    meet = K.find_meet(s.H, s.E, a, b, k, s.m)
    return Swap(c, d, k, int(r), int(a), int(b), int(meet))


def propose_from_uniforms(s: ChainState, u) -> Proposal:
    n, m = s.n, s.m
    c = min(int(u[0] * n) + 1, n)
    k = min(int(u[1] * m) + 1, m)
    kind = min(int(u[2] * 3), 2)
    if kind == K.KIND_FLIP:
        bounds = flip_bounds(s, c, k)
        if bounds is None:
            return None
        h0, h1 = bounds
        return Flip(c, k, h0 + min(int(u[3] * (h1 - h0 + 1)), h1 - h0))
    return find_color_swap(s, c, k, 1 if kind == K.KIND_SWAP_UP else -1)


def propose(s: ChainState, rng: np.random.Generator) -> Proposal:
    return propose_from_uniforms(s, rng.random(UNIFORMS_PER_STEP))


def proposal_distribution(s: ChainState) -> dict:
    """Exact proposal probabilities from ``s``; ``None`` collects no-ops."""
    n, m = s.n, s.m
    out: dict = {}
    base = 1.0 / (3 * n * m)
    for c in range(1, n + 1):
        for k in range(1, m + 1):
            bounds = flip_bounds(s, c, k)
            if bounds is None:
                out[None] = out.get(None, 0.0) + base
            else:
                h0, h1 = bounds
                for hp in range(h0, h1 + 1):
                    p = Flip(c, k, hp)
                    out[p] = out.get(p, 0.0) + base / (h1 - h0 + 1)
            for dir in (1, -1):
                p = find_color_swap(s, c, k, dir)
                out[p] = out.get(p, 0.0) + base
    return out


def _vertex_sets(s: ChainState, r: int, j: int) -> tuple[int, int]:
    present = east = 0
    for c in range(1, s.n + 1):
        sp = s.span(c, j)
        if sp is not None and sp[0] <= r <= sp[1]:
            present |= 1 << (c - 1)
            if sp[2] and r == sp[0]:
                east |= 1 << (c - 1)
    return present, east


def _power_at(s: ChainState, r: int, j: int) -> int:
    present, east = _vertex_sets(s, r, j)
    return color_interaction(present & ~east, east)


def apply(s: ChainState, p: Proposal) -> ChainState:
    """State after proposal ``p``, as a new object."""
    out = s.copy()
    if isinstance(p, Flip):
        out.H[p.c, p.k] = p.h_new
    elif isinstance(p, Swap):
        dummy = np.zeros((1, 1, 1), dtype=np.uint64)
        K.apply_swap(out.H, out.E, dummy, dummy, False, p.east, p.north, p.k, p.meet, s.m)
    return out


def _t_power(t, d: int) -> float:
    if d == 0:
        return 1.0
    if t == 0:
        return 0.0 if d > 0 else float("inf")
    return float(t) ** d


def flip_delta(s: ChainState, p: Flip) -> int:
    """Change in the t-power, from the vertices of columns k, k+1 between the two heights."""
    h = int(s.H[p.c, p.k])
    after = apply(s, p)
    lo, hi = min(h, p.h_new), max(h, p.h_new)
    delta = 0
    for j in (p.k, p.k + 1):
        for r in range(lo, hi + 1):
            delta += _power_at(after, r, j) - _power_at(s, r, j)
    return delta


def acceptance_ratio(s: ChainState, p: Proposal, params: WeightParams, fixed: bool = False) -> float:
    """Metropolis acceptance probability of ``p`` from ``s``."""
    if p is None:
        return 1.0
    if isinstance(p, Flip):
        h = int(s.H[p.c, p.k])
        if p.h_new == h:
            return 1.0
        ratio = (params.x_at(p.h_new) / params.x_at(h)) * params.q ** (p.h_new - h)
        ratio *= _t_power(params.t, flip_delta(s, p))
        return float(min(1.0, ratio))
    if fixed and p.meet == 0:
        return 0.0
    return float(min(1.0, _t_power(params.t, 1 if p.north < p.east else -1)))


def step_from_uniforms(s: ChainState, params: WeightParams, u, fixed: bool = False) -> ChainState:
    p = propose_from_uniforms(s, u)
    if p is None:
        return s
    if u[4] < acceptance_ratio(s, p, params, fixed):
        return apply(s, p)
    return s


def step(s: ChainState, params: WeightParams, rng: np.random.Generator, fixed: bool = False) -> ChainState:
    return step_from_uniforms(s, params, rng.random(UNIFORMS_PER_STEP), fixed)


# ---------------------------------------------------------------------------
# long runs
# ---------------------------------------------------------------------------


@dataclass
class ChainStats:
    steps: int = 0
    flips_proposed: int = 0
    flips_accepted: int = 0
    swaps_proposed: int = 0
    swaps_accepted: int = 0
    noops: int = 0

    @property
    def flip_acceptance(self) -> float:
        return self.flips_accepted / self.flips_proposed if self.flips_proposed else 0.0

    @property
    def swap_acceptance(self) -> float:
        return self.swaps_accepted / self.swaps_proposed if self.swaps_proposed else 0.0


@dataclass
class RunResult:
    state: ChainState
    stats: ChainStats
    samples: int = 0
    vertical: np.ndarray | None = None
    horizontal: np.ndarray | None = None
    snapshots: list = field(default_factory=list)
    traces: np.ndarray | None = None

    def occupancy(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean vertical and horizontal edge multiplicities, shape ``(n, m)``."""
        if self.vertical is None or self.samples == 0:
            raise DomainError("no occupancy samples were collected")
        m = self.state.m
        v = self.vertical[1:, 1 : m + 1] / self.samples
        h = self.horizontal[1:, 1 : m + 1] / self.samples
        return v, h


class _Engine:
    def __init__(self, b: BoundarySpec, params: WeightParams, seed, state: ChainState | None, block: int):
        if len(params.x) != b.n:
            raise DomainError(f"need {b.n} row weights, got {len(params.x)}")
        self.state = state.copy() if state is not None else initial_config(b)
        n, m = b.n, b.m
        self.n, self.m = n, m
        self.fixed = b.coloring is not None
        self.t = float(params.t)
        self.xh = np.zeros(n + 1)
        for h in range(1, n + 1):
            self.xh[h] = float(params.x_at(h))
        self.qpow = np.array([float(params.q) ** d for d in range(-n, n + 1)])
        nwords = (n + 63) // 64
        self.P = np.zeros((n + 2, m + 2, nwords), dtype=np.uint64)
        self.EM = np.zeros_like(self.P)
        if self.t > 0:
            K.build_masks(self.state.H, self.state.E, self.P, self.EM, n)
        self.rng = np.random.Generator(np.random.Philox(seed))
        self.stats = np.zeros(K.N_STATS, dtype=np.int64)
        self.block = block
        self.steps = 0

    def advance(self, steps: int):
        s = self.state
        while steps > 0:
            size = min(steps, self.block)
            U = self.rng.random((size, UNIFORMS_PER_STEP))
            K.run_block(s.H, s.E, self.P, self.EM, self.xh, self.qpow, self.t, self.fixed, U, self.stats, self.n, self.m)
            steps -= size
            self.steps += size

    def chain_stats(self) -> ChainStats:
        st = self.stats
        return ChainStats(
            self.steps,
            int(st[K.ST_FLIP_PROPOSED]),
            int(st[K.ST_FLIP_ACCEPTED]),
            int(st[K.ST_SWAP_PROPOSED]),
            int(st[K.ST_SWAP_ACCEPTED]),
            int(st[K.ST_NOOP]),
        )


def run(
    b: BoundarySpec,
    params: WeightParams,
    sweeps: int,
    burn_in: int = 0,
    seed: int = 0,
    observers: Iterable[str] = ("occupancy",),
    snapshot_every: int = 0,
    trace_every: int = 0,
    state: ChainState | None = None,
    block: int = DEFAULT_BLOCK,
) -> RunResult:
    """Run the chain for ``burn_in + sweeps`` sweeps of ``n * m`` steps.

    Observers act after every post-burn-in sweep: ``"occupancy"`` accumulates
    edge multiplicities, ``snapshot_every`` keeps every so many configurations,
    ``trace_every`` records the per-color areas.  The same seed reproduces
    every output bit for bit.
    """
    if sweeps < 0 or burn_in < 0:
        raise DomainError("sweeps and burn_in must be >= 0")
    observers = set(observers)
    unknown = observers - {"occupancy"}
    if unknown:
        raise DomainError(f"unknown observers {sorted(unknown)}")
    eng = _Engine(b, params, seed, state, block)
    n, m = eng.n, eng.m
    sweep = n * m
    eng.advance(burn_in * sweep)
    res = RunResult(eng.state, eng.chain_stats())
    if "occupancy" in observers:
        res.vertical = np.zeros((n + 1, m + 2), dtype=np.int64)
        res.horizontal = np.zeros((n + 1, m + 2), dtype=np.int64)
    traces = []
    area = np.zeros(n, dtype=np.int64)
    for i in range(1, sweeps + 1):
        eng.advance(sweep)
        if res.vertical is not None:
            K.observe(eng.state.H, eng.state.E, res.vertical, res.horizontal, n)
            res.samples += 1
        if snapshot_every and i % snapshot_every == 0:
            res.snapshots.append(eng.state.config())
        if trace_every and i % trace_every == 0:
            K.color_areas(eng.state.H, eng.state.E, n, area)
            traces.append(area.copy())
    if traces:
        res.traces = np.array(traces)
    res.stats = eng.chain_stats()
    return res
