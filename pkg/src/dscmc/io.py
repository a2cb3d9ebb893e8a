"""File formats: matrices (CSV, MVDM), manifests, result documents, PGM.

MVDM layout (all little-endian)::

    b"MVDM" | u32 version | u64 rows | u64 cols | rows*cols float64, row-major

Matrices on disk are features x samples, the same orientation used in memory.
"""

from __future__ import annotations

import csv
import json
import os
import re
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from .core import DimensionMismatch, DSCMCError, MultiViewDataset, validate_dataset

PathLike = Union[str, os.PathLike]

MVDM_MAGIC = b"MVDM"
MVDM_VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

RESULT_SCHEMA = "dscmc-result/1"
MANIFEST_VERSION = 1


class IOFailure(DSCMCError, OSError):
    """Base for file-format errors."""


class ParseError(IOFailure):
    pass


class MagicMismatch(IOFailure):
    pass


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(x))


def save_matrix(path: PathLike, X, fmt: str = "mvdm") -> None:
    X = np.ascontiguousarray(X, dtype="<f8")
    if X.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if fmt == "mvdm":
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MVDM_MAGIC, MVDM_VERSION, X.shape[0], X.shape[1]))
            fh.write(X.tobytes(order="C"))
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            for row in X:
                fh.write(",".join(_fmt(v) for v in row))
                fh.write("\n")
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def load_matrix(path: PathLike, fmt: str = "mvdm") -> np.ndarray:
    """Read a dense matrix written by :func:`save_matrix` (or by hand, for CSV)."""
    if fmt == "mvdm":
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise ParseError(f"{path}: expected at least {_HEADER.size} header "
                             f"bytes, found {len(raw)}")
        magic, version, rows, cols = _HEADER.unpack_from(raw)
        if magic != MVDM_MAGIC:
            raise MagicMismatch(f"{path}: bad magic {magic!r}, expected {MVDM_MAGIC!r}")
        if version != MVDM_VERSION:
            raise ParseError(f"{path}: unsupported MVDM version {version}")
        expected = _HEADER.size + 8 * rows * cols
        if len(raw) != expected:
            raise ParseError(f"{path}: expected {expected} bytes for a {rows}x{cols} "
                             f"matrix, found {len(raw)}")
        return np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(rows, cols).astype(np.float64)
    if fmt == "csv":
        rows = []
        with open(path, newline="") as fh:
            for lineno, rec in enumerate(csv.reader(fh), 1):
                if not rec:
                    continue
                try:
                    rows.append([float(cell) for cell in rec])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: malformed number in {rec!r}") from None
        if not rows:
            raise ParseError(f"{path}: empty matrix")
        width = len(rows[0])
        for i, r in enumerate(rows, 1):
            if len(r) != width:
                raise ParseError(f"{path}: row {i} has {len(r)} cells, row 1 has {width}")
        return np.array(rows, dtype=np.float64)
    raise ValueError(f"unknown matrix format {fmt!r}")


def save_labels(path: PathLike, y) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{int(v)}\n" for v in y)


def load_labels(path: PathLike) -> np.ndarray:
    """One integer per line, any alphabet; remapped to ``0..k-1`` in sorted order."""
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(int(line))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: not an integer label: {line!r}") from None
    _, dense = np.unique(np.array(vals, dtype=np.int64), return_inverse=True)
    return dense.astype(np.int64)


@dataclass
class ViewEntry:
    path: str
    rows: int
    cols: int
    format: str = "mvdm"


@dataclass
class Manifest:
    k: int
    views: List[ViewEntry]
    labels_path: Optional[str] = None
    version: int = MANIFEST_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def read_manifest(path: PathLike) -> Manifest:
    try:
        doc = json.loads(Path(path).read_text())
        views = [ViewEntry(str(v["path"]), int(v["rows"]), int(v["cols"]),
                           str(v.get("format", "mvdm"))) for v in doc["views"]]
        man = Manifest(int(doc["k"]), views, doc.get("labels_path"),
                       int(doc.get("version", MANIFEST_VERSION)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed manifest ({exc})") from None
    if not man.views:
        raise ParseError(f"{path}: manifest lists no views")
    cols = {v.cols for v in man.views}
    if len(cols) != 1:
        raise DimensionMismatch(f"{path}: views disagree on sample count {sorted(cols)}")
    return man


def load_dataset(manifest_path: PathLike) -> MultiViewDataset:
    """Load every view named by a manifest; paths resolve relative to it."""
    base = Path(manifest_path).resolve().parent
    man = read_manifest(manifest_path)
    views = []
    for i, entry in enumerate(man.views):
        X = load_matrix(base / entry.path, entry.format)
        if X.shape != (entry.rows, entry.cols):
            raise DimensionMismatch(
                f"view {i} ({entry.path}) is {X.shape[0]}x{X.shape[1]}, manifest "
                f"says {entry.rows}x{entry.cols}")
        views.append(X)
    labels = load_labels(base / man.labels_path) if man.labels_path else None
    d = MultiViewDataset(views, man.k, labels)
    validate_dataset(d)
    return d


def write_dataset(out_dir: PathLike, d: MultiViewDataset, fmt: str = "mvdm") -> Path:
    """Write views, labels and ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for v, X in enumerate(d.views):
        name = f"view_{v}.{fmt}"
        save_matrix(out / name, X, fmt)
        entries.append(ViewEntry(name, int(X.shape[0]), int(X.shape[1]), fmt))
    labels_path = None
    if d.labels is not None:
        labels_path = "labels.txt"
        save_labels(out / labels_path, d.labels)
    man = Manifest(int(d.k), entries, labels_path)
    path = out / "manifest.json"
    path.write_text(man.to_json())
    return path


_REQUIRED = ("schema", "hyperparams", "labels", "metrics", "trace", "Z")


def dump_result(path: PathLike, doc: dict) -> None:
    text = json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"
    Path(path).write_text(text)


def read_result(path: PathLike) -> dict:
    """Parse a result document; unknown keys are kept but never required."""
    try:
        doc = json.loads(Path(path).read_text())
    except ValueError as exc:
        raise ParseError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: result must be a JSON object")
    missing = [key for key in _REQUIRED if key not in doc]
    if missing:
        raise ParseError(f"{path}: result lacks keys {missing}")
    if doc["schema"] != RESULT_SCHEMA:
        raise ParseError(f"{path}: unknown schema {doc['schema']!r}")
    return doc


def write_pgm(path: PathLike, G) -> None:
    """8-bit binary (P5) grayscale image, min-max scaled to 0..255."""
    G = np.asarray(G, dtype=np.float64)
    lo, hi = G.min(), G.max()
    if hi > lo:
        img = np.rint((G - lo) / (hi - lo) * 255.0)
    else:
        img = np.zeros_like(G)
    h, w = G.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.astype(np.uint8).tobytes())


def read_pgm(path: PathLike) -> np.ndarray:
    raw = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if m is None:
        raise ParseError(f"{path}: not a binary PGM")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ParseError(f"{path}: only 8-bit PGM supported")
    data = np.frombuffer(raw, dtype=np.uint8, offset=m.end())
    if data.size != w * h:
        raise ParseError(f"{path}: expected {w * h} pixels, found {data.size}")
    return data.reshape(h, w)
