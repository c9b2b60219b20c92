"""Flat ``key = value`` experiment configuration."""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .atp import DEFAULT_COMMAND
from .errors import InputError

ALGORITHMS = ("split", "incremental", "scratch")
PATH_KEYS = ("statements", "order", "theorems", "features", "proofs", "oracle", "output")
SWEEP_KEYS = ("ratio", "numberOfTrees", "maxDepth", "eta")
_COMMENT = re.compile(r"\s+#.*$")


@dataclass(frozen=True)
class Config:
    statements: str = ""
    order: str = ""
    theorems: str = ""
    features: str = ""
    proofs: str = ""
    oracle: str = ""
    output: str = "out"
    algorithm: str = "scratch"
    method: str = "simple"  # comma-separated list runs each method in turn
    ratio: int = 16
    numberOfTrees: int = 2000
    maxDepth: int = 10
    eta: float = 0.2
    # "lambda" is a keyword; the config key is mapped by name below
    lam: float = 1.0
    min_child_weight: float = 1.0
    k: int = 40
    prover: str = "oracle"
    prover_command: str = DEFAULT_COMMAND
    cpu_limit: float = 10
    memory_limit: int = 2000
    oracle_max_axioms: int = 0  # 0: no cap
    keep_problems: bool = False
    max_rounds: int = 30
    train_fraction: float = 1000 / 1342
    sweep: str = ""  # e.g. "ratio:1,2,4,8,16,32,64"
    seed: int = 0
    workers: int = 1
    record_wall_time: bool = False

    def methods(self) -> list[str]:
        return [m.strip() for m in self.method.split(",") if m.strip()]

    def sweep_values(self):
        """``(key, [values])`` or ``None``."""
        if not self.sweep.strip():
            return None
        key, sep, values = self.sweep.partition(":")
        key = key.strip()
        if not sep or key not in SWEEP_KEYS:
            raise InputError(f"sweep must look like 'ratio:1,2,4' with key in {SWEEP_KEYS}")
        kind = _field_types()[_attr(key)]
        try:
            return key, [kind(v.strip()) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise InputError(f"bad sweep value: {exc}") from None

    def resolve(self, key, base_dir) -> Path | None:
        value = getattr(self, key)
        if not value:
            return None
        p = Path(value)
        return p if p.is_absolute() else Path(base_dir) / p


def _attr(key: str) -> str:
    return "lam" if key == "lambda" else key


def _key(attr: str) -> str:
    return "lambda" if attr == "lam" else attr


def _field_types():
    hints = {"str": str, "int": int, "float": float, "bool": _bool}
    return {f.name: hints[f.type] for f in fields(Config)}


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def config_keys() -> list[str]:
    return [_key(f.name) for f in fields(Config)]


def coerce(key: str, value) -> tuple[str, object]:
    attr = _attr(key)
    types = _field_types()
    if attr not in types:
        raise InputError(f"unknown config key {key!r}")
    try:
        return attr, types[attr](value)
    except ValueError as exc:
        raise InputError(f"bad value for {key}: {exc}") from None


def parse_config(text: str, overrides: dict | None = None) -> Config:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = _COMMENT.sub("", line).strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InputError(f"config line {lineno}: expected 'key = value'")
        attr, v = coerce(key.strip(), value.strip())
        values[attr] = v
    for key, value in (overrides or {}).items():
        attr, v = coerce(key, value)
        values[attr] = v
    cfg = Config(**values)
    validate_config(cfg)
    return cfg


def format_config(cfg: Config) -> str:
    lines = []
    for f in fields(Config):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{_key(f.name)} = {v}")
    return "\n".join(lines) + "\n"


def validate_config(cfg: Config) -> None:
    from .loop import METHODS

    if cfg.algorithm not in ALGORITHMS:
        raise InputError(f"algorithm must be one of {ALGORITHMS}")
    if not cfg.methods():
        raise InputError("no method given")
    for m in cfg.methods():
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}; choose from {METHODS}")
    if cfg.prover not in ("oracle", "external"):
        raise InputError("prover must be 'oracle' or 'external'")
    if cfg.prover == "external" and "{problem}" not in cfg.prover_command:
        raise InputError("prover_command needs a {problem} placeholder")
    if cfg.memory_limit <= 0 or cfg.oracle_max_axioms < 0:
        raise InputError("memory_limit > 0 and oracle_max_axioms >= 0 required")
    if cfg.ratio < 1 or cfg.numberOfTrees < 0 or cfg.maxDepth < 0 or cfg.k < 1:
        raise InputError("ratio >= 1, numberOfTrees >= 0, maxDepth >= 0, k >= 1 required")
    if not 0 < cfg.eta <= 1:
        raise InputError("eta must be in (0, 1]")
    if cfg.workers < 1 or cfg.max_rounds < 0 or cfg.cpu_limit <= 0:
        raise InputError("workers >= 1, max_rounds >= 0, cpu_limit > 0 required")
    if not 0 < cfg.train_fraction <= 1:
        raise InputError("train_fraction must be in (0, 1]")
    cfg.sweep_values()


def load_config(path, overrides=None) -> Config:
    return parse_config(Path(path).read_text(encoding="utf-8"), overrides)


def replace(cfg: Config, **changes) -> Config:
    return dataclasses.replace(cfg, **{_attr(k): v for k, v in changes.items()})
