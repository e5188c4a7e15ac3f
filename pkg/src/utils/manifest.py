"""
Run manifests: what was run, with which versions, and what it wrote.
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

logger = logging.getLogger(__name__)

TRACKED_PACKAGES = ["numpy", "scipy", "pandas", "shapely", "matplotlib", "pydantic", "PyYAML"]


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def package_versions(packages: Optional[List[str]] = None) -> Dict[str, str]:
    versions = {"python": platform.python_version()}
    for name in packages or TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "missing"
    return versions


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Accumulates timings and output files for one CLI command."""

    command: str
    config: Dict[str, Any]
    seed: int = 0
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    timings: Dict[str, float] = field(default_factory=dict)
    outputs: List[Dict[str, str]] = field(default_factory=list)
    status: str = "ok"

    @contextmanager
    def stage(self, name: str):
        """Time a named stage."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - start, 6)
            logger.debug("Stage %s took %.3fs", name, self.timings[name])

    def record(self, path: Union[str, Path], root: Union[str, Path]) -> Path:
        path = Path(path)
        self.outputs.append({"path": str(path.relative_to(root)), "sha256": sha256_file(path)})
        return path

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "status": self.status,
            "seed": self.seed,
            "started": self.started,
            "finished": self.finished,
            "timings": self.timings,
            "versions": package_versions(),
            "config": self.config,
            "outputs": self.outputs,
        }

    def write(self, out_dir: Union[str, Path], name: str = "manifest.json") -> Path:
        self.finished = _now()
        path = Path(out_dir) / name
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, default=str)
        logger.info("Wrote run manifest %s", path)
        return path
