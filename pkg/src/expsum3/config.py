"""Run configuration: plain ``key = value`` file < command-line flags < environment."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from expsum3.domain import DEFAULT_CAP
from expsum3.errors import ParameterError

CACHE_ENV = "EXPSUM3_CACHE_DIR"
PRECISIONS = ("auto", "double", "extended")


@dataclass(frozen=True)
class RunConfig:
    cache_dir: str | None = None
    default_precision: str = "auto"
    tuple_cap: int = DEFAULT_CAP
    quad_tol: float = 1e-6

    def __post_init__(self):
        if self.default_precision not in PRECISIONS:
            raise ParameterError(f"default_precision must be one of {PRECISIONS}")
        if self.tuple_cap < 1:
            raise ParameterError("tuple_cap must be positive")
        if not self.quad_tol > 0:
            raise ParameterError("quad_tol must be positive")

    def check_cache_dir(self) -> None:
        if self.cache_dir is None:
            return
        p = Path(self.cache_dir)
        try:
            p.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ParameterError(f"cache_dir {p} is not writable: {exc}") from None
        if not os.access(p, os.W_OK):
            raise ParameterError(f"cache_dir {p} is not writable")


_CASTS = {"cache_dir": str, "default_precision": str, "tuple_cap": lambda s: int(float(s)), "quad_tol": float}


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _CASTS:
            raise ParameterError(f"config line {lineno}: expected 'key = value' with key in {sorted(_CASTS)}")
        try:
            out[key] = _CASTS[key](value)
        except ValueError:
            raise ParameterError(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return out


def load_config(path: str | os.PathLike | None = None, overrides: dict | None = None, env=None) -> RunConfig:
    env = os.environ if env is None else env
    values = {}
    if path is not None:
        try:
            values.update(parse_config_text(Path(path).read_text()))
        except OSError as exc:
            raise ParameterError(f"cannot read config {path}: {exc}") from None
    names = {f.name for f in fields(RunConfig)}
    values.update({k: v for k, v in (overrides or {}).items() if k in names and v is not None})
    cfg = RunConfig(**values)
    if env.get(CACHE_ENV):
        cfg = replace(cfg, cache_dir=env[CACHE_ENV])
    return cfg
