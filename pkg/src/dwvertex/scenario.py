"""Scenario documents: model parameters, north boundary and run options.

A scenario is a TOML document with three tables::

    [model]
    n = 150
    t = 0.0
    q = 0.5
    q_scale = "macroscopic"   # or "lattice" (default)
    x = "uniform"             # or a list of n row weights, bottom to top

    [boundary]
    density = { profile = "gap", kappa = 0.25, mu = 1.0 }
    # or: exits = [[1, 1], [2, 1], ...]   (column, multiplicity)
    # optional: coloring = [...]          fixed exit column per color

    [run]
    sweeps = 20000
    burn_in = 2000
    seed = 1
    snapshots = 1

Density profiles: ``uniform`` (p), ``gap`` (kappa, mu, optional p, or a
``gaps`` list of [kappa, mu]), ``plateau`` (kappa, lambda: frozen outlets at
both ends), ``clump`` (kappa, lambda, optional mu) and ``table`` (points, a
list of [u, alpha(u)]). Unknown keys are rejected.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Any

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .arctic.profiles import DensityProfile, density_from_endpoints, endpoints_from_density
from .model import BoundarySpec, DomainError, WeightParams


class ScenarioError(DomainError):
    """Malformed or inconsistent scenario document."""


_MODEL_KEYS = {"n", "t", "q", "q_scale", "x"}
_BOUNDARY_KEYS = {"exits", "density", "coloring"}
_RUN_KEYS = {"sweeps", "burn_in", "seed", "snapshots"}
_PROFILE_KEYS = {
    "uniform": ({"p"}, set()),
    "gap": (set(), {"kappa", "mu", "p", "gaps"}),
    "plateau": ({"kappa", "lambda"}, set()),
    "clump": ({"kappa", "lambda"}, {"mu"}),
    "table": ({"points"}, set()),
}


@dataclass(frozen=True)
class RunOptions:
    sweeps: int = 1000
    burn_in: int = 0
    seed: int = 0
    snapshots: int = 1

    @property
    def snapshot_every(self) -> int:
        """Sweeps between kept snapshots (0 when none are kept)."""
        if self.snapshots <= 0 or self.sweeps == 0:
            return 0
        return max(1, self.sweeps // self.snapshots)


@dataclass(frozen=True)
class Scenario:
    n: int
    t: float = 0.0
    q: float = 1.0
    q_scale: str = "lattice"
    x: tuple | str = "uniform"
    exits: tuple[tuple[int, int], ...] | None = None
    density: dict | None = None
    coloring: tuple[int, ...] | None = None
    run: RunOptions = RunOptions()

    # ------------------------------------------------------------ derived objects
    @property
    def scale(self) -> int:
        """Rescaling factor of the lattice: one less than the number of paths."""
        return max(1, self.n - 1)

    @property
    def lattice_q(self) -> float:
        return self.q ** (1.0 / self.scale) if self.q_scale == "macroscopic" else self.q

    @property
    def macro_q(self) -> float:
        return self.q if self.q_scale == "macroscopic" else self.q**self.scale

    @property
    def params(self) -> WeightParams:
        xs = (1.0,) * self.n if self.x == "uniform" else self.x
        return WeightParams(xs, self.t, self.lattice_q)

    @property
    def boundary(self) -> BoundarySpec:
        if self.exits is not None:
            return BoundarySpec(self.n, self.exits, self.coloring)
        a = endpoints_from_density(self.profile, self.scale) if self.n > 1 else (0,)
        b = BoundarySpec.from_endpoints(a)
        return BoundarySpec(b.n, b.exits, self.coloring) if self.coloring else b

    @property
    def profile(self) -> DensityProfile:
        """Limiting exit distribution (from the exit list when no profile is given)."""
        if self.density is None:
            return density_from_endpoints(self.boundary.endpoints(), self.scale)
        return _build_profile(self.density)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(to_toml(self))

    # ------------------------------------------------------------ serialization
    def to_dict(self) -> dict[str, Any]:
        model: dict[str, Any] = {"n": self.n, "t": self.t, "q": self.q, "q_scale": self.q_scale}
        model["x"] = self.x if self.x == "uniform" else list(self.x)
        boundary: dict[str, Any] = {}
        if self.exits is not None:
            boundary["exits"] = [list(e) for e in self.exits]
        if self.density is not None:
            boundary["density"] = _plain(self.density)
        if self.coloring is not None:
            boundary["coloring"] = list(self.coloring)
        run = {
            "sweeps": self.run.sweeps,
            "burn_in": self.run.burn_in,
            "seed": self.run.seed,
            "snapshots": self.run.snapshots,
        }
        return {"model": model, "boundary": boundary, "run": run}


def _plain(d):
    if isinstance(d, dict):
        return {k: _plain(v) for k, v in d.items()}
    if isinstance(d, (list, tuple)):
        return [_plain(v) for v in d]
    return d


def to_toml(s: Scenario) -> str:
    return tomli_w.dumps(s.to_dict())


# ---------------------------------------------------------------- parsing


def _reject_unknown(table: dict, allowed: set, where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(extra)}")


def _number(v, where: str, *, positive=False, nonneg=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{where}: expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ScenarioError(f"{where}: must be > 0")
    if nonneg and v < 0:
        raise ScenarioError(f"{where}: must be >= 0")
    return float(v)


def _integer(v, where: str, minimum: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{where}: expected an integer, got {v!r}")
    if v < minimum:
        raise ScenarioError(f"{where}: must be >= {minimum}")
    return v


def _build_profile(d: dict) -> DensityProfile:
    kind = d["profile"]
    try:
        if kind == "uniform":
            return DensityProfile.uniform(d["p"])
        if kind == "gap":
            gaps = d.get("gaps") or [[d["kappa"], d["mu"]]]
            return DensityProfile.with_gaps([tuple(g) for g in gaps], d.get("p", 1.0))
        if kind == "plateau":
            return DensityProfile.frozen_ends(d["kappa"], d["lambda"])
        if kind == "clump":
            return DensityProfile.clump(d["kappa"], d["lambda"], d.get("mu", 0.0))
        return DensityProfile.piecewise_linear([tuple(p) for p in d["points"]])
    except DomainError as e:
        raise ScenarioError(f"boundary.density: {e}") from None


def _parse_density(d) -> dict:
    where = "boundary.density"
    if not isinstance(d, dict):
        raise ScenarioError(f"{where}: expected a table")
    kind = d.get("profile")
    if kind not in _PROFILE_KEYS:
        raise ScenarioError(f"{where}.profile: expected one of {sorted(_PROFILE_KEYS)}, got {kind!r}")
    required, optional = _PROFILE_KEYS[kind]
    _reject_unknown(d, required | optional | {"profile"}, where)
    missing = sorted(required - set(d))
    if missing:
        raise ScenarioError(f"{where}: profile {kind!r} needs {', '.join(missing)}")
    out: dict[str, Any] = {"profile": kind}
    for k in sorted(set(d) - {"profile"}):
        v = d[k]
        if k == "points":
            if not isinstance(v, list) or len(v) < 2 or any(not isinstance(p, list) or len(p) != 2 for p in v):
                raise ScenarioError(f"{where}.points: expected a list of [u, alpha] pairs")
            out[k] = [[_number(a, f"{where}.points"), _number(b, f"{where}.points")] for a, b in v]
        elif k == "gaps":
            if not isinstance(v, list) or not v or any(not isinstance(g, list) or len(g) != 2 for g in v):
                raise ScenarioError(f"{where}.gaps: expected a list of [kappa, mu] pairs")
            out[k] = [[_number(a, f"{where}.gaps"), _number(b, f"{where}.gaps", positive=True)] for a, b in v]
        else:
            out[k] = _number(v, f"{where}.{k}", nonneg=True)
    if kind == "gap" and "gaps" not in out and not {"kappa", "mu"} <= set(out):
        raise ScenarioError(f"{where}: profile 'gap' needs kappa and mu, or gaps")
    if kind == "gap" and "gaps" in out and ({"kappa", "mu"} & set(out)):
        raise ScenarioError(f"{where}: give either kappa/mu or gaps, not both")
    _build_profile(out)
    return out


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError(f"malformed scenario: {e}") from None
    _reject_unknown(doc, {"model", "boundary", "run"}, "scenario")
    for sec in ("model", "boundary"):
        if sec not in doc:
            raise ScenarioError(f"scenario: missing [{sec}] table")
    model, boundary, run = doc["model"], doc["boundary"], doc.get("run", {})
    _reject_unknown(model, _MODEL_KEYS, "model")
    _reject_unknown(boundary, _BOUNDARY_KEYS, "boundary")
    _reject_unknown(run, _RUN_KEYS, "run")

    if "n" not in model:
        raise ScenarioError("model.n: required")
    n = _integer(model["n"], "model.n", 1)
    t = _number(model.get("t", 0.0), "model.t", nonneg=True)
    q = _number(model.get("q", 1.0), "model.q", positive=True)
    q_scale = model.get("q_scale", "lattice")
    if q_scale not in ("lattice", "macroscopic"):
        raise ScenarioError(f"model.q_scale: expected 'lattice' or 'macroscopic', got {q_scale!r}")
    x = model.get("x", "uniform")
    if x != "uniform":
        if not isinstance(x, list) or len(x) != n:
            raise ScenarioError(f"model.x: expected 'uniform' or a list of {n} weights")
        x = tuple(_number(v, "model.x", positive=True) for v in x)

    has_exits, has_density = "exits" in boundary, "density" in boundary
    if has_exits == has_density:
        raise ScenarioError("boundary: give exactly one of exits or density")
    exits = density = None
    if has_exits:
        ex = boundary["exits"]
        if not isinstance(ex, list) or any(not isinstance(e, list) or len(e) != 2 for e in ex):
            raise ScenarioError("boundary.exits: expected a list of [column, multiplicity] pairs")
        exits = tuple((_integer(c, "boundary.exits", 1), _integer(k, "boundary.exits", 1)) for c, k in ex)
    else:
        density = _parse_density(boundary["density"])
        if n < 2:
            raise ScenarioError("boundary.density: needs model.n >= 2")
    coloring = None
    if "coloring" in boundary:
        col = boundary["coloring"]
        if not isinstance(col, list):
            raise ScenarioError("boundary.coloring: expected a list of columns")
        coloring = tuple(_integer(c, "boundary.coloring", 1) for c in col)

    opts = RunOptions(
        sweeps=_integer(run.get("sweeps", RunOptions.sweeps), "run.sweeps"),
        burn_in=_integer(run.get("burn_in", RunOptions.burn_in), "run.burn_in"),
        seed=_integer(run.get("seed", RunOptions.seed), "run.seed"),
        snapshots=_integer(run.get("snapshots", RunOptions.snapshots), "run.snapshots"),
    )
    s = Scenario(n, t, q, q_scale, x, exits, density, coloring, opts)
    try:
        s.boundary
    except DomainError as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(f"boundary: {e}") from None
    return s


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as f:
        return parse_scenario(f.read())
