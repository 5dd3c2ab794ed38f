"""Bijection between touching configurations and non-intersecting paths.

Path ``c`` of a touching configuration is shifted ``c - 1`` columns to the
right.  Heights are untouched, so row weights and per-path areas survive.
"""

from __future__ import annotations

from .model import ColoredConfig, DomainError, is_touching


def is_nilp(cfg: ColoredConfig) -> bool:
    """True when no two paths share a vertex."""
    return all(
        max(s[0] | s[1], s[2] | s[3]).bit_count() <= 1 for s in cfg.vertex_sets().values()
    )


def slide(cfg: ColoredConfig) -> ColoredConfig:
    """Shift path ``c`` right by ``c - 1`` columns."""
    if cfg.n == 0:
        return cfg
    if not is_touching(cfg):
        raise DomainError("configuration is outside the t=0 support (shared horizontal edge or crossing)")
    return ColoredConfig(cfg.n, cfg.m + cfg.n - 1, cfg.heights, tuple(range(cfg.n)))


def unslide(cfg: ColoredConfig) -> ColoredConfig:
    """Inverse of :func:`slide`."""
    if cfg.n == 0:
        return cfg
    if cfg.offsets != tuple(range(cfg.n)):
        raise DomainError("path c must start in column c")
    if not is_nilp(cfg):
        raise DomainError("paths intersect")
    out = ColoredConfig(cfg.n, cfg.m - cfg.n + 1, cfg.heights)
    if not is_touching(out):
        raise DomainError("un-shifted paths share a horizontal edge")
    out.validate()
    return out
