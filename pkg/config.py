"""
Run configuration for braid_lab, with environment overrides
"""
import os
from dataclasses import dataclass, field
from typing import List, Optional

from lw_graph import DEFAULT_LIFT_CAP

DEFAULT_MAX_N = 7


class ConfigError(ValueError):
    """Invalid run configuration"""


def _env_int(name: str, default: int) -> int:
    """Integer from the environment, or default when unset or empty"""
    raw = os.environ.get(name)
    if raw is None or raw == '':
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name}={raw!r} is not an integer") from None


@dataclass
class RunConfig:
    """Settings for one braid_lab run; threads is the number of worker processes used for sampling"""
    n: int = 3
    l: Optional[int] = None
    lmax: int = 20
    r: int = 10
    seed: int = 0
    samples: int = 10_000
    out: Optional[str] = None
    fmt: str = 'json'
    cache_dir: Optional[str] = None
    threads: int = 1
    lift_cap: int = DEFAULT_LIFT_CAP
    max_n: int = DEFAULT_MAX_N
    log_dir: Optional[str] = 'logs'
    patterns: List[str] = field(default_factory=list)

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        """Defaults, then BRAID_LAB_* environment variables, then explicit overrides"""
        config = cls(
            cache_dir=os.environ.get('BRAID_LAB_CACHE') or None,
            threads=_env_int('BRAID_LAB_THREADS', os.cpu_count() or 1),
            lift_cap=_env_int('BRAID_LAB_LIFT_CAP', DEFAULT_LIFT_CAP),
            max_n=_env_int('BRAID_LAB_MAX_N', DEFAULT_MAX_N),
            log_dir=os.environ.get('BRAID_LAB_LOG_DIR', 'logs'),
        )
        for key, value in overrides.items():
            if value is None:
                continue
            if not hasattr(config, key):
                raise ConfigError(f"unknown configuration field '{key}'")
            setattr(config, key, value)
        return config

    def validate(self) -> "RunConfig":
        """Raise ConfigError on the first bad field; returns self so it chains after from_env"""
        if not 3 <= self.n <= self.max_n:
            raise ConfigError(f"n must be between 3 and {self.max_n}, got {self.n}")
        if self.l is not None and self.l < 0:
            raise ConfigError(f"l must be non-negative, got {self.l}")
        if self.lmax < 0:
            raise ConfigError(f"lmax must be non-negative, got {self.lmax}")
        if self.r < 1:
            raise ConfigError(f"r must be at least 1, got {self.r}")
        if self.samples < 0:
            raise ConfigError(f"samples must be non-negative, got {self.samples}")
        if self.fmt not in ('json', 'csv'):
            raise ConfigError(f"format must be json or csv, got {self.fmt!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if self.lift_cap <= 0:
            raise ConfigError(f"lift cap must be positive, got {self.lift_cap}")
        if self.out:
            directory = os.path.dirname(os.path.abspath(self.out))
            if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
                raise ConfigError(f"output directory {directory} is not writable")
        return self
