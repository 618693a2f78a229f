"""On-disk artifact store.

Layout: ``<root>/<kind>/<stem>-<hash8>.<ext>`` where ``hash8`` is a short
digest over the input file digests and the parameters, so artifacts built
from different inputs never share a name. Each artifact gets a sidecar
``<file>.manifest.json`` listing input digests, parameters and the
effective config. Writers hold ``<file>.lock`` (created exclusively) while
writing; a second writer to the same name fails with ``ArtifactError``.
"""

from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence

from .container import read_header
from .errors import ArtifactError

ROOT_ENV = "CITYPULSE_HOME"
DEFAULT_ROOT = ".citypulse"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def input_hash(inputs: Mapping[str, str], params: Mapping = None) -> str:
    """Short digest over ``{role: file digest}`` plus parameters."""
    blob = canonical_json({"inputs": dict(inputs), "params": dict(params or {})})
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:8]


def manifest_path(path) -> Path:
    return Path(str(path) + ".manifest.json")


@contextmanager
def write_lock(path):
    lock = Path(str(path) + ".lock")
    lock.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ArtifactError(f"artifact {path} is locked by another writer ({lock})") from None
    try:
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


class ArtifactStore:
    def __init__(self, root=None):
        self.root = Path(root or os.environ.get(ROOT_ENV) or DEFAULT_ROOT)

    def path_for(self, kind: str, stem: str, inputs: Mapping[str, str], params: Mapping, ext: str) -> Path:
        return self.root / kind / f"{stem}-{input_hash(inputs, params)}.{ext}"

    @staticmethod
    def record(path, kind: str, inputs: Mapping[str, str], params: Mapping, config: Mapping = None,
               outputs: Sequence = ()) -> None:
        """Write the sidecar manifest; input keys are role names, values digests."""
        entry = {
            "artifact": Path(path).name, "kind": kind, "inputs": dict(inputs),
            "params": dict(params), "config": dict(config or {}),
            "outputs": {Path(o).name: file_digest(o) for o in outputs},
        }
        manifest_path(path).write_text(json.dumps(entry, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
                                       encoding="utf-8")


def load_manifest(path) -> Optional[dict]:
    mp = manifest_path(path)
    if not mp.exists():
        return None
    return json.loads(mp.read_text(encoding="utf-8"))


def check_magic(path, magic: str, version: int = 1) -> dict:
    """Header of a container or JSON artifact, after checking magic and version."""
    try:
        header = read_header(path)
    except FileNotFoundError:
        raise ArtifactError(f"missing artifact {path}") from None
    if header.get("magic") != magic:
        raise ArtifactError(f"{path}: bad magic {header.get('magic')!r}, expected {magic}")
    if header.get("version") != version:
        raise ArtifactError(f"{path}: unsupported version {header.get('version')!r}")
    return header


def check_digest(path, expected: str, role: str) -> None:
    """Refuse to mix artifacts: ``path`` must be the file another artifact was built from."""
    actual = file_digest(path)
    if actual != expected:
        raise ArtifactError(f"{role} {path} does not match the one this model was built with "
                            f"({actual[:8]} != {expected[:8]})")


def digests(paths: Dict[str, Optional[str]]) -> Dict[str, str]:
    return {role: file_digest(p) for role, p in paths.items() if p}
