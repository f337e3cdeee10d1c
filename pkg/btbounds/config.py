"""
Verification Settings
Uses pydantic-settings for environment variable management
"""

from pydantic_settings import BaseSettings
from typing import Dict
from functools import lru_cache
from contextlib import contextmanager


class Settings(BaseSettings):
    """Verification settings loaded from environment variables"""

    # Worker pool
    threads: int = 4

    # Enumeration
    enumeration_cap: int = 1_000_000
    tree_cap: int = 200_000
    group_cap: int = 2_000_000

    # Arithmetic
    default_prec: int = 8
    default_level: int = 3

    # Randomized families
    seed: int = 0

    # Output
    report_dir: str = "reports"
    debug: bool = False

    @property
    def caps(self) -> Dict[str, int]:
        """Per-enumeration caps"""
        return {
            "cosets": self.enumeration_cap,
            "tree": self.tree_cap,
            "group": self.group_cap,
        }

    def cap_for(self, kind: str) -> int:
        """Cap for one enumeration kind, falling back to the global cap"""
        return self.caps.get(kind, self.enumeration_cap)

    @property
    def log_level(self) -> str:
        return "DEBUG" if self.debug else "INFO"

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        env_prefix = "BT_BOUNDS_"
        case_sensitive = False


@lru_cache()
def get_settings() -> Settings:
    """
    Cached settings instance.
    Uses lru_cache to ensure settings are loaded only once.
    """
    return Settings()


# Convenience export for direct import
settings = get_settings()


@contextmanager
def overridden_settings(**updates):
    """Temporarily set fields on the cached settings for one suite run"""
    current = get_settings()
    previous = {key: getattr(current, key) for key in updates}
    for key, value in updates.items():
        setattr(current, key, value)
    try:
        yield current
    finally:
        for key, value in previous.items():
            setattr(current, key, value)
