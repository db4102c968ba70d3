"""
settings.py: Runtime settings read from the environment (and an optional .env file).
CLI flags take precedence over anything resolved here.
"""

import os
from dataclasses import dataclass
from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    workers: int
    chunk_size: int
    log_level: str
    config_dir: str
    results_dir: str


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise RuntimeError(f"{name} must be at least 1, got {value}")
    return value


def get_settings() -> Settings:
    load_dotenv()
    return Settings(
        workers=_int_env("GELS_WORKERS", 1),
        chunk_size=_int_env("GELS_CHUNK_SIZE", 50),
        log_level=os.getenv("GELS_LOG_LEVEL", "WARNING").upper(),
        config_dir=os.getenv("GELS_CONFIG_DIR", os.path.join(os.getcwd(), "configs")),
        results_dir=os.getenv("GELS_RESULTS_DIR", os.path.join(os.getcwd(), "results")),
    )
