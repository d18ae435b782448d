"""Manifest of the real-world benchmark networks and local file lookup.

Data is not bundled. Place edge-list files named after each manifest entry's
``file`` field in a data directory (``--data-dir`` or ``$FUZZANON_DATA``).
Checksums are verified when the manifest carries one.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .graph import Graph, GraphError, read_edge_list


class DatasetError(GraphError):
    pass


@dataclass(frozen=True)
class DatasetInfo:
    name: str
    key: str
    file: str
    nodes: int
    edges: int
    clustering: float
    path_length: float
    lcc_fraction: float
    modularity: float
    source: str = ""
    url: str | None = None
    sha256: str | None = None


def manifest() -> dict[str, DatasetInfo]:
    text = resources.files("fuzzanon").joinpath("data/datasets.json").read_text("utf-8")
    return {d["key"]: DatasetInfo(**d) for d in json.loads(text)["datasets"]}


def data_dir(explicit: str | os.PathLike | None = None) -> Path:
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get("FUZZANON_DATA", "data"))


def sha256sum(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def locate(key: str, directory: str | os.PathLike | None = None) -> Path:
    info = manifest().get(key)
    if info is None:
        raise DatasetError(f"dataset {key!r} is not in the manifest")
    path = data_dir(directory) / info.file
    if not path.is_file():
        raise DatasetError(f"dataset {info.name!r} ({key}) not found at {path}")
    if info.sha256 and sha256sum(path) != info.sha256:
        raise DatasetError(f"dataset {info.name!r}: checksum mismatch for {path}")
    return path


def available(directory: str | os.PathLike | None = None) -> list[str]:
    d = data_dir(directory)
    return [k for k, info in manifest().items() if (d / info.file).is_file()]


def load(key: str, directory: str | os.PathLike | None = None) -> Graph:
    return read_edge_list(locate(key, directory), extra_columns=True)
