"""Result cache: one JSON file per entry, named by a content hash of the request.

Keys include ALGORITHM_VERSION, so bumping it invalidates every stored entry. Any IO or decoding problem
degrades to a recomputation with a warning.
"""

import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from loguru import logger

ALGORITHM_VERSION = "2026.10.0"


def cache_key(payload: Mapping[str, Any]) -> str:
    text = json.dumps({"version": ALGORITHM_VERSION, "request": payload}, sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ResultCache:
    def __init__(self, directory: Optional[Path]) -> None:
        self.directory = Path(directory) if directory is not None else None

    @property
    def enabled(self) -> bool:
        return self.directory is not None

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def load(self, key: str) -> Optional[Dict[str, Any]]:
        if not self.enabled:
            return None
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as f:
                entry = json.load(f)
        except (OSError, ValueError) as error:
            logger.warning(f"ignoring unreadable cache entry {path.name}: {error}")
            return None
        if not isinstance(entry, dict) or entry.get("key") != key or "value" not in entry:
            logger.warning(f"ignoring corrupted cache entry {path.name}")
            return None
        logger.debug(f"cache hit {key[:12]}")
        return entry["value"]

    def store(self, key: str, value: Mapping[str, Any]) -> None:
        if not self.enabled:
            return
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump({"key": key, "value": value}, f, sort_keys=True, indent=2)
            os.replace(tmp, path)
        except OSError as error:
            logger.warning(f"could not write cache entry {path.name}: {error}")
        else:
            logger.debug(f"cached {key[:12]}")
