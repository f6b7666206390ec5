"""Named run profiles.

A JSON file maps profile names to RunConfig documents. Keeps reproducible
settings (desk-scale experiments, CI runs) next to the data instead of in
shell history.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Dict

from biscount.config import RunConfig
from biscount.errors import ProfileNotFoundError


class JSONConfigStore:
    def __init__(self, path: str | os.PathLike | None = None):
        default_path = os.getenv("BISCOUNT_PROFILE_PATH", "config/profiles.json")
        self.path = Path(path or default_path)

    def load_all(self) -> Dict[str, RunConfig]:
        if not self.path.exists():
            return {}
        data = json.loads(self.path.read_text(encoding="utf-8"))
        return {name: RunConfig.model_validate(v) for name, v in data.items()}

    def load(self, name: str) -> RunConfig:
        all_cfg = self.load_all()
        if name not in all_cfg:
            raise ProfileNotFoundError(f"Profile '{name}' not found in {self.path}")
        return all_cfg[name]

    def save(self, name: str, cfg: RunConfig) -> None:
        all_cfg = self.load_all()
        all_cfg[name] = cfg
        self.path.parent.mkdir(parents=True, exist_ok=True)
        serial = {k: v.model_dump(exclude_defaults=True) for k, v in all_cfg.items()}
        self.path.write_text(json.dumps(serial, indent=2, sort_keys=True) + "\n", encoding="utf-8")


__all__ = ["JSONConfigStore"]
