from __future__ import annotations

import logging
import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field


logger = logging.getLogger(__name__)


def initialize_env() -> None:
    """Load environment variables from .env if present."""
    load_dotenv()


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    digits: int = Field(default=50, gt=0)
    guard_digits: int = Field(default=10, ge=0)
    cache_dir: Path | None = None
    log_level: str = "INFO"
    jobs: int = Field(default=1, ge=1)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", name, raw)
        return default


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Settings resolved from the environment (after ``initialize_env``)."""
    cache_dir = os.getenv("TWISTLAB_CACHE_DIR")
    return Settings(
        digits=_env_int("TWISTLAB_DIGITS", 50),
        guard_digits=_env_int("TWISTLAB_GUARD_DIGITS", 10),
        cache_dir=Path(cache_dir).expanduser() if cache_dir else None,
        log_level=os.getenv("TWISTLAB_LOG_LEVEL", "INFO").upper(),
        jobs=_env_int("TWISTLAB_JOBS", 1),
    )
