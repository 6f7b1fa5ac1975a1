"""Service configuration: JSON file with environment-variable overrides.

Environment variables win over the file; both are optional. With no admin
token configured the /admin routes refuse every request.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

CLOCK_WALL = "wall"
CLOCK_FIXED = "fixed"

_ENV_PREFIX = "SEATBID_"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8000"
    ledger_path: str = "ledger.jsonl"
    clock_mode: str = CLOCK_WALL  # "wall" | "fixed"
    clock_start: int = 0
    admin_token: str | None = None

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])


def load_config(path: str | Path | None = None) -> ServiceConfig:
    cfg = ServiceConfig()
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        for key in ("listen", "ledger_path", "clock_mode", "clock_start", "admin_token"):
            if key in data:
                setattr(cfg, key, data[key])

    env = os.environ
    if _ENV_PREFIX + "LISTEN" in env:
        cfg.listen = env[_ENV_PREFIX + "LISTEN"]
    if _ENV_PREFIX + "LEDGER_PATH" in env:
        cfg.ledger_path = env[_ENV_PREFIX + "LEDGER_PATH"]
    if _ENV_PREFIX + "CLOCK_MODE" in env:
        cfg.clock_mode = env[_ENV_PREFIX + "CLOCK_MODE"]
    if _ENV_PREFIX + "CLOCK_START" in env:
        cfg.clock_start = int(env[_ENV_PREFIX + "CLOCK_START"])
    if _ENV_PREFIX + "ADMIN_TOKEN" in env:
        cfg.admin_token = env[_ENV_PREFIX + "ADMIN_TOKEN"]

    if cfg.clock_mode not in (CLOCK_WALL, CLOCK_FIXED):
        raise ValueError(f"clock_mode must be '{CLOCK_WALL}' or '{CLOCK_FIXED}'")
    return cfg
