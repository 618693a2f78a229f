"""Binary container: one JSON header line, then raw little-endian arrays.

The header carries ``magic`` and ``version`` plus an ``arrays`` list of
``{"name", "dtype", "shape"}`` entries describing the payload, in order.
"""

from __future__ import annotations

import json
from typing import Dict, Tuple

import numpy as np

from .errors import ArtifactError

_DTYPES = {"f32": "<f4", "i32": "<i4"}


def write_container(path, magic: str, header: dict, arrays: Dict[str, Tuple[str, np.ndarray]],
                    version: int = 1) -> None:
    """``arrays`` maps name -> (dtype code, array); codes are ``f32`` and ``i32``."""
    entries = []
    payload = []
    for name, (code, arr) in arrays.items():
        a = np.ascontiguousarray(arr, dtype=_DTYPES[code])
        entries.append({"name": name, "dtype": code, "shape": list(a.shape)})
        payload.append(a.tobytes(order="C"))
    head = dict(header, magic=magic, version=version, arrays=entries)
    line = json.dumps(head, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    with open(path, "wb") as fh:
        fh.write(line.encode("utf-8") + b"\n")
        for chunk in payload:
            fh.write(chunk)


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        line = fh.readline()
    try:
        return json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"{path}: not a container file") from exc


def read_container(path, magic: str, version: int = 1):
    """Return ``(header, {name: array})`` after checking magic and version."""
    with open(path, "rb") as fh:
        line = fh.readline()
        body = fh.read()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"{path}: not a container file") from exc
    if header.get("magic") != magic:
        raise ArtifactError(f"{path}: expected magic {magic}, found {header.get('magic')!r}")
    if header.get("version") != version:
        raise ArtifactError(f"{path}: unsupported {magic} version {header.get('version')!r}")
    arrays = {}
    pos = 0
    for entry in header["arrays"]:
        dt = np.dtype(_DTYPES[entry["dtype"]])
        count = int(np.prod(entry["shape"], dtype=np.int64))
        nbytes = count * dt.itemsize
        if pos + nbytes > len(body):
            raise ArtifactError(f"{path}: truncated payload")
        arrays[entry["name"]] = np.frombuffer(body, dtype=dt, count=count, offset=pos).reshape(entry["shape"]).copy()
        pos += nbytes
    if pos != len(body):
        raise ArtifactError(f"{path}: trailing bytes after payload")
    return header, arrays
