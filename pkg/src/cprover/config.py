"""
Run configuration for the verification CLI.

Precedence: command-line flags > the dotenv-format file named by
CPROVER_CONFIG > process environment > defaults. Flags are applied by
``main`` through :meth:`RunConfig.with_overrides`.
"""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, fields, replace
from pathlib import Path

from dotenv import dotenv_values, load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240101
DEFAULT_SAMPLES = 20
DEFAULT_DIM = 4
GOLDEN_VERSION = "v1"
DEFAULT_GOLDEN_DIR = Path("golden") / GOLDEN_VERSION

FORMATS = ("json", "markdown", "both")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class ConfigError(ValueError):
    """Invalid configuration value; maps to exit code 2."""


def _int(key: str, raw: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None


def parse_int_list(key: str, raw: str) -> tuple[int, ...]:
    parts = [p for p in raw.replace(" ", "").split(",") if p]
    out: list[int] = []
    for p in parts:
        if "-" in p[1:]:
            lo, hi = p.split("-", 1)
            out += range(_int(key, lo), _int(key, hi) + 1)
        else:
            out.append(_int(key, p))
    return tuple(out)


def parse_names(raw: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in raw.split(",") if p.strip())


def _bool(key: str, raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"{key} must be a boolean, got {raw!r}")


@dataclass(frozen=True)
class RunConfig:
    """What to verify and where the reports go."""

    checks: tuple[str, ...] = ("all",)
    omegas: tuple[int, ...] = (2,)
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    dim: int = DEFAULT_DIM
    format: str = "both"
    out: Path | None = None
    jobs: int = 1
    golden_dir: Path = DEFAULT_GOLDEN_DIR
    timings: bool = False
    allow_large: bool = False
    log_level: str = "INFO"

    @classmethod
    def from_mapping(cls, values: Mapping[str, str | None]) -> RunConfig:
        """Build from CPROVER_* keys; missing keys keep their defaults."""

        def get(key: str) -> str | None:
            v = values.get(key)
            return None if v is None or v == "" else v

        kwargs: dict[str, object] = {}
        if (v := get("CPROVER_CHECKS")) is not None:
            kwargs["checks"] = parse_names(v)
        if (v := get("CPROVER_OMEGA")) is not None:
            kwargs["omegas"] = parse_int_list("CPROVER_OMEGA", v)
        for key, name in (
            ("CPROVER_SEED", "seed"),
            ("CPROVER_SAMPLES", "samples"),
            ("CPROVER_DIM", "dim"),
            ("CPROVER_JOBS", "jobs"),
        ):
            if (v := get(key)) is not None:
                kwargs[name] = _int(key, v)
        if (v := get("CPROVER_FORMAT")) is not None:
            kwargs["format"] = v.strip().lower()
        if (v := get("CPROVER_OUT")) is not None:
            kwargs["out"] = Path(v)
        if (v := get("CPROVER_GOLDEN_DIR")) is not None:
            kwargs["golden_dir"] = Path(v)
        if (v := get("CPROVER_TIMINGS")) is not None:
            kwargs["timings"] = _bool("CPROVER_TIMINGS", v)
        if (v := get("CPROVER_ALLOW_LARGE")) is not None:
            kwargs["allow_large"] = _bool("CPROVER_ALLOW_LARGE", v)
        if (v := get("CPROVER_LOG_LEVEL")) is not None:
            kwargs["log_level"] = v.strip().upper()
        return cls(**kwargs).validated()

    @classmethod
    def from_env(cls) -> RunConfig:
        """Environment first, then the CPROVER_CONFIG file on top of it."""
        merged: dict[str, str | None] = {k: v for k, v in os.environ.items() if k.startswith("CPROVER_")}
        path = os.getenv("CPROVER_CONFIG")
        if path:
            if not Path(path).is_file():
                raise ConfigError(f"CPROVER_CONFIG points to a missing file: {path}")
            logger.debug("Reading config file %s", path)
            merged.update({k: v for k, v in dotenv_values(path).items() if v is not None})
        return cls.from_mapping(merged)

    def with_overrides(self, **overrides: object) -> RunConfig:
        """Apply flag values; ``None`` means the flag was not given."""
        known = {f.name for f in fields(self)}
        changes = {k: v for k, v in overrides.items() if v is not None and k in known}
        return replace(self, **changes).validated()

    def validated(self) -> RunConfig:
        if not self.checks:
            raise ConfigError("At least one check is required")
        if not self.omegas:
            raise ConfigError("The omega list must not be empty")
        if any(w < 1 for w in self.omegas):
            raise ConfigError(f"omega values must be >= 1, got {list(self.omegas)}")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if self.dim < 3:
            raise ConfigError(f"dim must be >= 3, got {self.dim}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, got {self.format!r}")
        if self.log_level not in LOG_LEVELS:
            raise ConfigError(f"log level must be one of {', '.join(LOG_LEVELS)}, got {self.log_level!r}")
        return self
