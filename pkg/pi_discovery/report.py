"""
Result files: atomic CSV/JSON/SVG writes and the run manifest.

Every command that writes files also writes `manifest.json` into the same
directory. It lists every output with its sha256; JSON results carry the
manifest's file name under the "manifest" key.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .timebase import HardwareProfile

__all__ = [
    "MANIFEST_NAME",
    "RunManifest",
    "atomic_write_text",
    "dumps",
    "tool_version",
    "write_csv",
    "write_json",
]

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def tool_version() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        return version("pi-discovery")
    except PackageNotFoundError:
        return "0+unknown"


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write `text` to a temporary file next to `path`, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = None
    try:
        with tempfile.NamedTemporaryFile(
            "w", delete=False, dir=path.parent, encoding="utf-8", newline="", suffix=".tmp"
        ) as f:
            tmp_path = f.name
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except OSError:
        if tmp_path and os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug("wrote %s (%d bytes)", path, len(text.encode()))
    return path


def _json_default(o: Any) -> Any:
    if hasattr(o, "item"):
        # numpy scalars
        return o.item()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(payload: Mapping[str, Any]) -> str:
    """Indented JSON with sorted keys; numpy scalars and enums are unwrapped."""
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default)


def write_json(path: str | Path, payload: Mapping[str, Any], *, manifest: bool = True) -> Path:
    data = dict(payload)
    if manifest:
        data.setdefault("manifest", MANIFEST_NAME)
    return atomic_write_text(path, dumps(data) + "\n")


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if v is None else v for v in row])
    return atomic_write_text(path, buf.getvalue())


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    arguments: dict[str, Any]
    hw: HardwareProfile
    master_seed: int | None = None
    version: str = field(default_factory=tool_version)
    started: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished: str | None = None
    outputs: list[Path] = field(default_factory=list)

    def add(self, path: Path) -> Path:
        self.outputs.append(path)
        return path

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "arguments": self.arguments,
            "hardware_profile": self.hw.to_dict(),
            "hardware_profile_sha256": self.hw.digest(),
            "master_seed": self.master_seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "outputs": {p.name: _sha256(p) for p in self.outputs if p.exists()},
        }

    def write(self, out_dir: str | Path) -> Path:
        self.finished = datetime.now(timezone.utc).isoformat()
        return write_json(Path(out_dir) / MANIFEST_NAME, self.to_dict(), manifest=False)
