"""
Process-level settings read from the environment (prefix ``MELLG_``).
"""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Environment configuration for the simulator process."""

    model_config = SettingsConfigDict(env_prefix="MELLG_", extra="ignore")

    threads: int = Field(1, ge=1, description="Maximum concurrent sweep members")
    log_level: str = Field("INFO", description="Logging level name")
    log_json: bool = Field(False, description="Emit JSON log lines")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
