"""Flat key = value run configuration.

One assignment per line, ``#`` starts a comment, keys are fixed in
advance. Parsing is strict: unknown keys, malformed values, and
parameter combinations outside the admissible regime are all rejected
with the offending key and line number, so a bad sweep fails before any
work is done. ``serialize_config`` and ``parse_config`` round-trip.

Sweep files reuse the same grammar and add ``sweep.<key> = v1, v2, ...``
lines; every other line seeds the base configuration shared by all
cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields, replace

from .dynamics import DEFAULT_THRESHOLDS, StepControls
from .errors import ConfigError
from .functionals import ModelParams
from .mesh import Grid, make_grid
from .scenarios import PRESET_NAMES

__all__ = [
    "RunConfig",
    "SweepConfig",
    "parse_config",
    "parse_sweep_config",
    "serialize_config",
]

MAX_SWEEP_CELLS = 10_000


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one simulation run."""

    dim: int = 1
    N: int = 128
    extent: float = 1.0
    p: float = 3.0
    r: float = 2.0
    gamma: float = 0.5
    beta: float = 1.0
    preset: str = "negative_energy"
    amplitude: float = 1.0
    energy_R: float = 1.0
    seed: int = 0
    dt_max: float = 1e-3
    dt_min: float | None = None  # resolved to 1e-12 * dt_max when unset
    t_max: float = 10.0
    blow_threshold: float = 1e9
    output_every: int = 10
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    mu: float = 1.0
    alpha_override: float | None = None
    eps_override: float | None = None
    M_safety: float = 2.0

    def model_params(self) -> ModelParams:
        return ModelParams(p=self.p, r=self.r, gamma=self.gamma,
                           beta=self.beta, dim=self.dim)

    def grid(self) -> Grid:
        return make_grid(self.dim, self.N, self.extent)

    def step_controls(self) -> StepControls:
        dt_min = self.dt_min if self.dt_min is not None else 1e-12 * self.dt_max
        return StepControls(dt_max=self.dt_max, dt_min=dt_min)


@dataclass(frozen=True)
class SweepConfig:
    """Base run plus named axes expanded as a cartesian product."""

    base: RunConfig = field(default_factory=RunConfig)
    axes: dict[str, tuple] = field(default_factory=dict)
    max_cells: int = MAX_SWEEP_CELLS

    def cells(self) -> list[RunConfig]:
        """All configurations in the product, axes in sorted key order."""
        keys = sorted(self.axes)
        total = 1
        for k in keys:
            total *= len(self.axes[k])
        if total > self.max_cells:
            raise ConfigError(
                f"sweep product has {total} cells, cap is {self.max_cells}")
        out = []
        for combo in itertools.product(*(self.axes[k] for k in keys)):
            out.append(replace(self.base, **dict(zip(keys, combo))))
        return out


# parsing ------------------------------------------------------------------

def _parse_int(text: str) -> int:
    value = int(text)
    if str(value) != text.strip():
        raise ValueError(text)
    return value


def _parse_float(text: str) -> float:
    value = float(text)
    if not value == value:  # reject nan
        raise ValueError(text)
    return value


def _parse_optional_float(text: str) -> float | None:
    if text.strip().lower() in ("none", ""):
        return None
    return _parse_float(text)


def _parse_str(text: str) -> str:
    return text.strip()


def _parse_float_list(text: str) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError(text)
    return tuple(_parse_float(p) for p in parts)


_PARSERS = {
    "dim": _parse_int,
    "N": _parse_int,
    "extent": _parse_float,
    "p": _parse_float,
    "r": _parse_float,
    "gamma": _parse_float,
    "beta": _parse_float,
    "preset": _parse_str,
    "amplitude": _parse_float,
    "energy_R": _parse_float,
    "seed": _parse_int,
    "dt_max": _parse_float,
    "dt_min": _parse_optional_float,
    "t_max": _parse_float,
    "blow_threshold": _parse_float,
    "output_every": _parse_int,
    "thresholds": _parse_float_list,
    "mu": _parse_float,
    "alpha_override": _parse_optional_float,
    "eps_override": _parse_optional_float,
    "M_safety": _parse_float,
}

_FIELD_NAMES = {f.name for f in fields(RunConfig)}
assert set(_PARSERS) == _FIELD_NAMES


def _validate(cfg: RunConfig) -> None:
    """Reject configurations outside the admissible regime."""
    def bad(msg: str) -> None:
        raise ConfigError(msg)

    if cfg.dim not in (1, 2):
        bad(f"dim must be 1 or 2, got {cfg.dim}")
    if cfg.N < 1:
        bad(f"N must be positive, got {cfg.N}")
    if not cfg.extent > 0:
        bad(f"extent must be positive, got {cfg.extent}")
    if not cfg.p > 1:
        bad(f"p must exceed 1, got {cfg.p}")
    if not 1 <= cfg.r < cfg.p:
        bad(f"need 1 <= r < p, got r={cfg.r}, p={cfg.p}")
    if cfg.gamma < 0:
        bad(f"gamma must be nonnegative, got {cfg.gamma}")
    if not 2 * cfg.gamma + 1 < cfg.p:
        bad(f"need 2*gamma + 1 < p, got gamma={cfg.gamma}, p={cfg.p}")
    if cfg.beta < 0:
        bad(f"beta must be nonnegative, got {cfg.beta}")
    if cfg.preset not in PRESET_NAMES:
        bad(f"unknown preset {cfg.preset!r}, choose from {PRESET_NAMES}")
    if not cfg.dt_max > 0:
        bad(f"dt_max must be positive, got {cfg.dt_max}")
    if cfg.dt_min is not None and not 0 < cfg.dt_min <= cfg.dt_max:
        bad(f"dt_min must lie in (0, dt_max], got {cfg.dt_min}")
    if not cfg.t_max > 0:
        bad(f"t_max must be positive, got {cfg.t_max}")
    if not cfg.blow_threshold > 0:
        bad(f"blow_threshold must be positive, got {cfg.blow_threshold}")
    if cfg.output_every < 1:
        bad(f"output_every must be at least 1, got {cfg.output_every}")
    if len(cfg.thresholds) < 3:
        bad("thresholds needs at least 3 values for a crossing fit")
    if any(t <= 0 for t in cfg.thresholds):
        bad("thresholds must be positive")
    if any(a >= b for a, b in zip(cfg.thresholds, cfg.thresholds[1:])):
        bad("thresholds must be strictly increasing")
    if not cfg.mu > 0:
        bad(f"mu must be positive, got {cfg.mu}")
    if not cfg.M_safety > 1:
        bad(f"M_safety must exceed 1, got {cfg.M_safety}")
    if cfg.alpha_override is not None and not cfg.alpha_override > 0:
        bad(f"alpha_override must be positive, got {cfg.alpha_override}")
    if cfg.eps_override is not None and not cfg.eps_override > 0:
        bad(f"eps_override must be positive, got {cfg.eps_override}")


def _assignments(text: str):
    """Yield (lineno, key, raw value) for every assignment line."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        yield lineno, key.strip(), value.strip()


def _parse_items(items) -> RunConfig:
    overrides = {}
    for lineno, key, value in items:
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in overrides:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            overrides[key] = _PARSERS[key](value)
        except (ValueError, OverflowError):
            raise ConfigError(
                f"line {lineno}: bad value {value!r} for key {key!r}") from None
    cfg = RunConfig(**overrides)
    _validate(cfg)
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse a flat run configuration, rejecting sweep axes."""
    for lineno, key, _ in _assignments(text):
        if key.startswith("sweep."):
            raise ConfigError(
                f"line {lineno}: sweep axes ({key!r}) need the sweep command")
    return _parse_items(_assignments(text))


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse a sweep configuration: base keys plus sweep.<key> axes."""
    base_items = []
    axes: dict[str, tuple] = {}
    for lineno, key, value in _assignments(text):
        if not key.startswith("sweep."):
            base_items.append((lineno, key, value))
            continue
        name = key[len("sweep."):]
        if name not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown sweep key {name!r}")
        if name in axes:
            raise ConfigError(f"line {lineno}: duplicate sweep key {name!r}")
        if name == "thresholds":
            raise ConfigError(f"line {lineno}: thresholds cannot be swept")
        try:
            parts = [p.strip() for p in value.split(",") if p.strip()]
            if not parts:
                raise ValueError(value)
            axes[name] = tuple(_PARSERS[name](p) for p in parts)
        except (ValueError, OverflowError):
            raise ConfigError(
                f"line {lineno}: bad value {value!r} for sweep key {name!r}") from None
    base = _parse_items(base_items)
    sweep = SweepConfig(base=base, axes=axes)
    for cell in sweep.cells():
        _validate(cell)
    return sweep


# serialization ------------------------------------------------------------

def _fmt_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        return ", ".join("%.17g" % v for v in value)
    if isinstance(value, int):
        return str(value)
    return "%.17g" % value


def serialize_config(cfg: RunConfig) -> str:
    """Render a configuration so that parse_config recovers it exactly."""
    lines = [f"{f.name} = {_fmt_value(getattr(cfg, f.name))}"
             for f in fields(RunConfig)]
    return "\n".join(lines) + "\n"
