"""Run manifests: what a run emitted, with checksums, written atomically."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = ["FileRecord", "RunManifest", "sha256_file", "write_atomic"]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_atomic(path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


@dataclass(frozen=True)
class FileRecord:
    name: str
    sha256: str
    bytes: int

    @classmethod
    def of(cls, path, root) -> "FileRecord":
        path = Path(path)
        return cls(str(path.relative_to(root)), sha256_file(path), path.stat().st_size)


@dataclass
class RunManifest:
    """Record of one run.

    ``config_sha256`` is the checksum embedded in every SVG of the run;
    ``status`` is ``ok`` or the name of the error that stopped the run.
    """

    config: dict
    config_sha256: str
    seed: int
    version: str
    started_utc: str
    wall_clock_s: float
    status: str = "ok"
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def write(self, path) -> Path:
        return write_atomic(path, self.to_json())

    @classmethod
    def read(cls, path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        data["files"] = [FileRecord(**f) for f in data.get("files", [])]
        return cls(**data)
