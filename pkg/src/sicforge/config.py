"""Run configuration: a dataclass, a key=value file format and an echo file.

Config file format: one `key = value` per line; `#` starts a comment;
blank lines are ignored. Keys are the field names of `Config`. Booleans
accept true/false/yes/no/1/0; `none` clears an optional field.
Precedence: defaults < config file < environment (user agent) < flags.
"""

from __future__ import annotations

import dataclasses
import os
import typing
from dataclasses import dataclass, fields
from pathlib import Path

from .backtest import BacktestConfig
from .errors import InputError
from .transport import DEFAULT_RATE_MS

USER_AGENT_ENV = "SICFORGE_USER_AGENT"
ECHO_NAME = "effective-config.txt"
PATH_FIELDS = ("data_dir", "fixture_dir", "run_dir")


class ConfigError(InputError):
    """Bad configuration file, key or value."""


@dataclass
class Config:
    data_dir: Path = Path("data")
    fixture_dir: Path | None = None  # set -> offline: pages come from fixtures only
    run_dir: Path = Path("run")
    rate_ms: int = DEFAULT_RATE_MS
    user_agent: str | None = None
    include_otc: bool = False
    dedupe: bool = False
    top_n: int = 2000
    interval: int = 21
    lookback: int = 21
    addv_window: int = 21
    ridge: float = 1e-8
    investment: float = 2e7
    bound_fraction: float = 0.01
    add_market: bool = True
    cond_threshold: float = 1e8
    seed: int = 0
    seeds: int = 1
    workers: int = 1
    synthetic_industries: int = 20
    synthetic_per_industry: int = 10
    synthetic_days: int = 250

    def resolved(self) -> "Config":
        """Copy with every path made absolute."""
        changes = {}
        for name in PATH_FIELDS:
            value = getattr(self, name)
            if value is not None:
                changes[name] = Path(value).expanduser().resolve()
        return dataclasses.replace(self, **changes)

    def backtest_config(self) -> BacktestConfig:
        return BacktestConfig(
            top_n=self.top_n, interval=self.interval, addv_window=self.addv_window, lookback=self.lookback,
            investment=self.investment, bound_fraction=self.bound_fraction, add_market=self.add_market,
            cond_threshold=self.cond_threshold, ridge=self.ridge,
        )

    def format(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {'none' if value is None else _render(value)}")
        return "".join(line + "\n" for line in lines)

    def write_echo(self, directory: str | os.PathLike | None = None) -> Path:
        d = Path(directory) if directory is not None else Path(self.run_dir)
        d.mkdir(parents=True, exist_ok=True)
        path = d / ECHO_NAME
        path.write_text(self.format(), encoding="utf-8")
        return path


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


_TYPES = typing.get_type_hints(Config)


def _base_type(name: str):
    hint = _TYPES[name]
    args = [a for a in typing.get_args(hint) if a is not type(None)]
    return (args[0] if args else hint), type(None) in typing.get_args(hint)


def coerce(name: str, text: str):
    if name not in _TYPES:
        raise ConfigError(f"unknown config key {name!r}")
    kind, optional = _base_type(name)
    raw = text.strip()
    if optional and raw.lower() in ("none", ""):
        return None
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is Path:
            return Path(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in body.split("=", 1))
        values[key] = coerce(key, value)
    return values


def load_config(path: str | os.PathLike | None = None, overrides: dict | None = None,
                environ: typing.Mapping[str, str] | None = None) -> Config:
    """Defaults, then the file, then the environment, then explicit overrides
    (None values in `overrides` mean "not given"). Paths come back resolved."""
    env = os.environ if environ is None else environ
    values: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        values.update(parse_config_text(text))
    if env.get(USER_AGENT_ENV):
        values["user_agent"] = env[USER_AGENT_ENV]
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = coerce(key, value) if isinstance(value, str) else value
    cfg = Config(**values)
    for name in ("rate_ms", "top_n", "interval", "lookback", "addv_window", "seeds", "workers"):
        if getattr(cfg, name) < (0 if name == "rate_ms" else 1):
            raise ConfigError(f"{name} must be positive")
    if cfg.investment <= 0 or cfg.bound_fraction <= 0 or cfg.ridge < 0:
        raise ConfigError("investment and bound_fraction must be positive, ridge nonnegative")
    return cfg.resolved()
