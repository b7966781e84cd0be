"""File formats.

Space descriptions are JSON objects such as ``{"kind": "seq", "q": 2, "dim": 8}``
or ``{"kind": "op", "domain": {...}, "codomain": {...}}``; ``"inf"`` stands
for an infinite exponent.

A dyadic function is a CSV file whose first line is the literal header
``level,dim``, followed by one line ``L,d`` and then ``2^L`` rows of ``d``
coordinates (operator values are flattened row-major).  Readers also
accept files without the literal header line.

A Carleson family is a JSON manifest ``{"level", "indices", "space", "files"}``
with one dyadic-function CSV per listed index, paths relative to the
manifest.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

from .carleson import CarlesonFamily
from .dyadic import DyadicFunction
from .spaces import OperatorSpace, SequenceSpace, SpaceSpec, space_from_json, space_to_json

PathLike = Union[str, os.PathLike]


def _fmt(x: float) -> str:
    return repr(float(x))


def load_space(obj: Any) -> SpaceSpec:
    """Space from a dict, a JSON string, or a path to a JSON file."""
    if isinstance(obj, (SequenceSpace, OperatorSpace)):
        return obj
    if isinstance(obj, str):
        s = obj.strip()
        obj = json.loads(s) if s.startswith("{") else json.loads(Path(s).read_text())
    return space_from_json(obj)


def read_rows(path: PathLike) -> list[list[str]]:
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]


def read_vectors(path: PathLike, space: SpaceSpec) -> np.ndarray:
    """One vector per CSV row; a leading non-numeric header row is skipped."""
    rows = read_rows(path)
    if rows and not _numeric(rows[0]):
        rows = rows[1:]
    arr = np.array([[float(c) for c in r] for r in rows], dtype=float)
    if not len(arr):
        return np.zeros((0,) + space.shape)
    size = int(np.prod(space.shape))
    if arr.shape[1] != size:
        raise ValueError(f"rows of {path} have {arr.shape[1]} entries, {space} needs {size}")
    return arr.reshape((len(arr),) + space.shape)


def write_vectors(path: PathLike, xs: np.ndarray) -> None:
    xs = np.asarray(xs, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for x in xs.reshape(len(xs), -1):
            w.writerow([_fmt(v) for v in x])


def _numeric(row: Sequence[str]) -> bool:
    try:
        [float(c) for c in row]
    except ValueError:
        return False
    return True


def read_dyadic(path: PathLike, space: SpaceSpec) -> DyadicFunction:
    rows = read_rows(path)
    if rows and [c.strip().lower() for c in rows[0]] == ["level", "dim"]:
        rows = rows[1:]
    if not rows or len(rows[0]) != 2:
        raise ValueError(f"{path}: expected a 'L,d' line before the values")
    level, dim = int(rows[0][0]), int(rows[0][1])
    size = int(np.prod(space.shape))
    if dim != size:
        raise ValueError(f"{path}: dimension {dim} does not match {space}")
    vals = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
    if vals.shape != (1 << level, dim):
        raise ValueError(f"{path}: expected {1 << level} rows of {dim} values, got {vals.shape}")
    return DyadicFunction(level, space, vals.reshape((1 << level,) + space.shape))


def write_dyadic(path: PathLike, f: DyadicFunction) -> None:
    flat = f.values.reshape(f.n_atoms, -1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "dim"])
        w.writerow([f.level, flat.shape[1]])
        for row in flat:
            w.writerow([_fmt(v) for v in row])


def read_family(manifest: PathLike) -> CarlesonFamily:
    manifest = Path(manifest)
    meta = json.loads(manifest.read_text())
    space = load_space(meta["space"])
    level = int(meta["level"])
    files: Mapping[str, str] = meta["files"]
    funcs = {}
    for j in meta["indices"]:
        name = files[str(j)]
        funcs[int(j)] = read_dyadic(manifest.parent / name, space)
    return CarlesonFamily.from_funcs(level, space, funcs)


def write_family(manifest: PathLike, theta: CarlesonFamily, stem: str = "theta") -> None:
    manifest = Path(manifest)
    files = {}
    for j in theta.indices:
        name = f"{stem}_{j}.csv"
        write_dyadic(manifest.parent / name, theta.func(j))
        files[str(j)] = name
    meta = {"level": theta.level, "indices": list(theta.indices),
            "space": space_to_json(theta.space), "files": files}
    manifest.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def write_table(path: PathLike, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


def write_json(path: PathLike, obj: Any) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n")
