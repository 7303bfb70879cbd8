"""Run configurations and the flat ``key = value`` file format they load from."""

from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    m: int = 10                      # traders are indexed 0..m
    wealth: float = 100.0
    yes_reserve: float = 1000.0
    no_reserve: float = 1000.0
    exponent: float = 0.5            # Maniswap p; 0.5 is constant product
    learning_rate: float = 0.0
    agreement: float = 1.0
    warmup: int = 100
    post: int = 100
    shock: float = 0.05              # signed price move applied by the manipulator
    replications: int = 10_000
    seed: int = 20240101

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError("m must be a positive integer")
        if not self.wealth > 0:
            raise ConfigError("wealth must be positive")
        if not (self.yes_reserve > 0 and self.no_reserve > 0):
            raise ConfigError("initial reserves must be positive")
        if not 0.0 < self.exponent < 1.0:
            raise ConfigError("exponent must lie in (0, 1)")
        for name in ("learning_rate", "agreement"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.warmup < 0 or self.post < 1:
            raise ConfigError("warmup must be >= 0 and post >= 1")
        if self.replications < 1:
            raise ConfigError("replications must be a positive integer")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        p0 = self.initial_price
        if not (math.isfinite(self.shock) and abs(self.shock) < min(p0, 1.0 - p0)):
            raise ConfigError(f"|shock| must be below min(p0, 1 - p0) = {min(p0, 1 - p0):.6g}")

    @property
    def initial_price(self) -> float:
        y, n, p = self.yes_reserve, self.no_reserve, self.exponent
        return n * p / (n * p - p * y + y)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ExperimentConfig:
    """Synthetic field experiment: one simulated market per row of the design."""

    n_markets: int = 90
    p_yes: float = 1 / 3
    p_no: float = 1 / 3
    p_control: float = 1 / 3
    shock: float = 0.05              # magnitude; YES markets get +shock, NO markets -shock
    horizon: int = 100
    warmup: int = 100
    wealth: float = 100.0
    exponent: float = 0.5
    m_values: tuple[int, ...] = (10, 20, 30, 40, 50, 60)
    learning_rates: tuple[float, ...] = (0.0, 0.2, 0.4)
    agreements: tuple[float, ...] = (0.6, 0.8, 1.0)
    liquidity: tuple[float, ...] = (500.0, 1000.0, 2000.0)
    seed: int = 20240101

    def __post_init__(self):
        if self.n_markets < 1 or self.horizon < 0 or self.warmup < 0:
            raise ConfigError("n_markets must be positive; horizon and warmup non-negative")
        probs = self.arm_probabilities
        if any(not 0.0 <= q <= 1.0 for q in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise ConfigError(f"arm probabilities must be in [0, 1] and sum to 1, got {probs}")
        if not 0.0 <= self.shock < 0.5:
            raise ConfigError("shock must lie in [0, 0.5)")
        for name in ("m_values", "learning_rates", "agreements", "liquidity"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must list at least one value")

    @property
    def arm_probabilities(self) -> tuple[float, float, float]:
        return (self.p_yes, self.p_no, self.p_control)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _parse_value(raw: str, kind, key: str):
    raw = raw.strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw
        origin = typing.get_origin(kind)
        if origin is tuple:
            inner = typing.get_args(kind)[0]
            items = [s for s in (part.strip() for part in raw.split(",")) if s]
            return tuple(inner(s) for s in items)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None
    raise ConfigError(f"unsupported type for {key!r}")


def parse_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def build(cls, pairs: dict[str, str]):
    """Instantiate ``cls`` from string pairs; unknown keys are errors."""
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(pairs) - names)
    if unknown:
        raise ConfigError(f"unknown config key(s) for {cls.__name__}: {', '.join(unknown)}")
    kwargs = {k: _parse_value(v, hints[k], k) for k, v in pairs.items()}
    return cls(**kwargs)


def load(cls, path: str | Path | None = None, overrides: dict[str, str] | None = None):
    pairs: dict[str, str] = {}
    if path is not None:
        path = Path(path)
        pairs = parse_pairs(path.read_text(), str(path))
    pairs.update(overrides or {})
    return build(cls, pairs)


def format_value(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def dump(config) -> str:
    return "".join(f"{f.name} = {format_value(getattr(config, f.name))}\n"
                   for f in dataclasses.fields(config))


def to_row(config) -> dict[str, str]:
    return {f.name: format_value(getattr(config, f.name)) for f in dataclasses.fields(config)}
