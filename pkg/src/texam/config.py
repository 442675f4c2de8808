"""Runtime configuration shared by the service and the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

DEFAULT_PORT = 8000
DEFAULT_DATA_DIR = "texam-data"
DEFAULT_TOKEN_TTL_MINUTES = 120


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    token_ttl_minutes: int = DEFAULT_TOKEN_TTL_MINUTES
    bootstrap_username: str = "manager"
    bootstrap_password: str | None = None
    # scrypt cost parameters; configuration, not code constants
    scrypt_n: int = 2**14
    scrypt_r: int = 8
    scrypt_p: int = 1

    @property
    def store_path(self) -> Path:
        return Path(self.data_dir) / "texam.db"
