"""Experiment configuration: flat ``key = value`` files.

A configuration file holds one experiment.  Lines are ``key = value`` pairs
(``#`` and ``;`` start comments); there are no sections.  Keys fall in three
groups:

surface
    Everything understood by :func:`curvnet.surface.chart_from_config`
    (``kind``, shape parameters, ``domain``, ``pattern`` ...).
net
    ``strategy`` (``revolution | traced | umbilic``), ``levels`` and the
    strategy parameters listed in :class:`ExperimentConfig`.
run
    ``variants``, ``dense_factor``, ``out``, ``seed``.

Example::

    kind = torus
    R = 2
    r = 0.5
    strategy = revolution
    meridian_factor = 5
    parallel_factor = 1
    levels = 8, 16, 32, 64
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..curvature import VARIANTS
from ..errors import ConfigError

__all__ = ["STRATEGIES", "ExperimentConfig", "load_config", "parse_config"]

STRATEGIES = ("revolution", "traced", "umbilic")

_SECTION = "experiment"
_RUN_KEYS = {"strategy", "levels", "variants", "dense_factor", "out", "seed", "meridian_factor",
             "parallel_factor", "urange", "vrange", "seeds", "spacing_scale", "region", "sectors"}


def _numbers(text: str, key: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"key '{key}': expected numbers, got '{text}'") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """One refinement experiment.

    Attributes
    ----------
    surface : dict
        Surface keys, passed to :func:`curvnet.surface.chart_from_config`.
    strategy : str
        ``revolution`` (parameter-line grid: surfaces of revolution and
        totally umbilic charts), ``traced`` (ODE-traced lines) or ``umbilic``
        (lines around the umbilic of an umbilic patch).
    levels : tuple of int
        Refinement levels.  ``revolution``: level ``L`` gives
        ``max(3, round(meridian_factor*L))`` meridians and
        ``max(2, round(parallel_factor*L))`` parallels (one more on a
        non-periodic axis).  ``traced``: line spacing ``spacing_scale / L``.
        ``umbilic``: ``L`` rings.
    variants : tuple of str
        Integrated-curvature variants to evaluate.
    dense_factor : int
        Sup-error sample density relative to the net density (>= 4).
    out : str
        Output directory.
    seed : int
        Seed of the sample jitter.
    meridian_factor, parallel_factor : float
        ``revolution`` level mapping.
    urange, vrange : (float, float) or None
        ``revolution`` parameter sub-ranges.
    seeds : int
        ``traced``: number of diagonal seeds (each gives one line per family).
    spacing_scale : float
        ``traced``: line spacing at level 1.
    region : (u0, u1, v0, v1) or None
        ``traced``: parameter sub-rectangle to cover.
    sectors : int
        ``umbilic``: minimal valence of the umbilic vertex.
    """

    surface: dict
    strategy: str = "revolution"
    levels: tuple = (4, 8, 16, 32)
    variants: tuple = VARIANTS
    dense_factor: int = 4
    out: str = "out"
    seed: int = 0
    meridian_factor: float = 2.0
    parallel_factor: float = 1.0
    urange: tuple | None = None
    vrange: tuple | None = None
    seeds: int = 8
    spacing_scale: float = 1.6
    region: tuple | None = None
    sectors: int = 3
    name: str = field(default="experiment", compare=False)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy '{self.strategy}' (expected one of {', '.join(STRATEGIES)})")
        if len(self.levels) < 2:
            raise ConfigError("at least 2 refinement levels are needed for a rate fit")
        if any(int(L) != L or L < 1 for L in self.levels):
            raise ConfigError("levels must be positive integers")
        if list(self.levels) != sorted(set(self.levels)):
            raise ConfigError("levels must be strictly increasing")
        if int(self.dense_factor) != self.dense_factor or self.dense_factor < 4:
            raise ConfigError("dense_factor must be an integer >= 4")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise ConfigError(f"unknown variant(s) {bad} (expected a subset of {', '.join(VARIANTS)})")
        for key in ("urange", "vrange"):
            r = getattr(self, key)
            if r is not None and (len(r) != 2 or not r[0] < r[1]):
                raise ConfigError(f"{key} expects two increasing numbers")
        if self.region is not None and (len(self.region) != 4 or not (self.region[0] < self.region[1]
                                                                     and self.region[2] < self.region[3])):
            raise ConfigError("region expects u0 < u1, v0 < v1")
        if self.seeds < 1 or self.spacing_scale <= 0:
            raise ConfigError("seeds and spacing_scale must be positive")

    def with_overrides(self, **kw) -> "ExperimentConfig":
        """Copy with the non-``None`` keyword arguments replaced."""
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def parse_config(text: str, name: str = "experiment") -> ExperimentConfig:
    """Parse the text of a configuration file.

    Examples
    --------
    >>> cfg = parse_config("kind = torus  # closed grids\\nR = 2\\nr = 0.5\\nlevels = 8, 16, 32")
    >>> cfg.surface, cfg.strategy, cfg.levels
    ({'kind': 'torus', 'R': '2', 'r': '0.5'}, 'revolution', (8, 16, 32))
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case (R vs r)
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    items = dict(cp[_SECTION])
    surface = {k: v for k, v in items.items() if k not in _RUN_KEYS}
    if "kind" not in surface:
        raise ConfigError("missing surface key 'kind'")
    kw: dict = {}
    if "strategy" in items:
        kw["strategy"] = items["strategy"].strip().lower()
    if "levels" in items:
        kw["levels"] = tuple(int(x) for x in _numbers(items["levels"], "levels"))
    if "variants" in items:
        kw["variants"] = tuple(v.strip() for v in items["variants"].replace(",", " ").split())
    for key, typ in (("dense_factor", int), ("seed", int), ("seeds", int), ("sectors", int),
                     ("meridian_factor", float), ("parallel_factor", float), ("spacing_scale", float)):
        if key in items:
            vals = _numbers(items[key], key)
            if len(vals) != 1 or (typ is int and vals[0] != int(vals[0])):
                raise ConfigError(f"key '{key}' expects one {typ.__name__}")
            kw[key] = typ(vals[0])
    for key in ("urange", "vrange", "region"):
        if key in items:
            kw[key] = tuple(_numbers(items[key], key))
    if "out" in items:
        kw["out"] = items["out"].strip()
    return ExperimentConfig(surface=surface, name=name, **kw)


def load_config(path) -> ExperimentConfig:
    """Read a configuration file (see the module docstring for the format)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration '{path}': {exc}") from exc
    return parse_config(text, name=path.stem)
