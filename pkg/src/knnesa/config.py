"""Run configuration: defaults < config file < environment (paths) < flags."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields

from knnesa.errors import KnnEsaError
from knnesa.esa import MEASURES, canonical_measure
from knnesa.knn.models import canonical_algorithm
from knnesa.knn.selection import STRATEGIES

PATH_KEYS = ("corpus", "index", "model", "vocab")
ENV_PREFIX = "KNNESA_"


class ConfigError(KnnEsaError):
    pass


@dataclass
class RunConfig:
    k: int = 25
    alpha: float = 1.6
    tau: float = 0.5
    seed: int = 0
    algorithm: str = "rf"
    strategy: str = "cutoff"
    measure: str = "jaccard"
    trees: int = 100
    threads: int = 1
    corpus: str | None = None
    index: str | None = None
    model: str | None = None
    vocab: str | None = None

    def validate(self) -> "RunConfig":
        if self.k < 1:
            raise ConfigError(f"k must be >= 1 (got {self.k})")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0 (got {self.alpha})")
        if not 0 < self.tau < 1:
            raise ConfigError(f"tau must lie in (0, 1) (got {self.tau})")
        if self.trees < 1:
            raise ConfigError(f"trees must be >= 1 (got {self.trees})")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1 (got {self.threads})")
        try:
            canonical_algorithm(self.algorithm)
            canonical_measure(self.measure)
        except KnnEsaError as exc:
            raise ConfigError(str(exc)) from None
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {', '.join(STRATEGIES)}")
        return self

    def as_dict(self) -> dict:
        return asdict(self)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {raw!r}") from None
    return raw


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _TYPES:
                raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
            values[key] = _convert(key, value)
    return values


def resolve_config(config_path=None, overrides: dict | None = None, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    values = {}
    if config_path:
        values.update(read_config_file(config_path))
    for key in PATH_KEYS:
        env = environ.get(ENV_PREFIX + key.upper())
        if env:
            values[key] = env
    for key, value in (overrides or {}).items():
        if value is not None and key in _TYPES:
            values[key] = value
    return RunConfig(**values).validate()


__all__ = ["ConfigError", "MEASURES", "RunConfig", "read_config_file", "resolve_config"]
