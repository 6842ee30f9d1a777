"""Dataset files: CSV with ``#`` metadata header lines, or a single JSON document.

CSV layout::

    # qthermo-dataset: 1
    # <key>: <json value>
    col_a,col_b,...
    1.5707963267948966,4.5399722126128815e-05,...

Floats are written with 17 significant digits so they parse back bit-exactly.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

FORMAT_TAG = "qthermo-dataset"
FORMAT_VERSION = 1


class DatasetFormatError(ValueError):
    pass


@dataclass
class DatasetFile:
    columns: List[str]
    rows: np.ndarray
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = [str(c) for c in self.columns]
        rows = np.asarray(self.rows, dtype=float)
        if rows.size == 0:
            rows = rows.reshape(0, len(self.columns))
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise DatasetFormatError(
                f"rows must be 2-d with {len(self.columns)} columns, got shape {rows.shape}")
        self.rows = rows

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def __eq__(self, other):
        if not isinstance(other, DatasetFile):
            return NotImplemented
        return (self.columns == other.columns and self.metadata == other.metadata
                and self.rows.shape == other.rows.shape
                and np.array_equal(self.rows, other.rows, equal_nan=True))

    @classmethod
    def from_columns(cls, columns: Dict[str, Sequence[float]], metadata=None):
        names = list(columns)
        rows = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
        return cls(names, rows, dict(metadata or {}))


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _json(value) -> str:
    return json.dumps(value, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_csv(ds: DatasetFile) -> str:
    out = io.StringIO()
    out.write(f"# {FORMAT_TAG}: {FORMAT_VERSION}\n")
    for key in sorted(ds.metadata):
        if "\n" in key or ":" in key:
            raise DatasetFormatError(f"invalid metadata key {key!r}")
        out.write(f"# {key}: {_json(ds.metadata[key])}\n")
    for name in ds.columns:
        if not name or "," in name or "\n" in name:
            raise DatasetFormatError(f"invalid column name {name!r}")
    if ds.columns and ds.columns[0].startswith("#"):
        raise DatasetFormatError("first column name must not start with '#'")
    out.write(",".join(ds.columns) + "\n")
    for row in ds.rows:
        out.write(",".join(_fmt(float(x)) for x in row) + "\n")
    return out.getvalue()


def from_csv(text: str) -> DatasetFile:
    lines = text.split("\n")  # not splitlines(): names may contain \x85 and friends
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(f"# {FORMAT_TAG}:"):
        raise DatasetFormatError("missing dataset header line")
    meta = {}
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        key, _, value = lines[i][2:].partition(": ")
        meta[key] = json.loads(value)
        i += 1
    if i >= len(lines):
        raise DatasetFormatError("missing column header")
    columns = lines[i].split(",")
    rows = [[float(x) for x in line.split(",")] for line in lines[i + 1:] if line]
    return DatasetFile(columns, np.array(rows, dtype=float).reshape(len(rows), len(columns)), meta)


def to_json(ds: DatasetFile) -> str:
    doc = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "metadata": ds.metadata,
        "columns": ds.columns,
        "rows": [[float(x) for x in row] for row in ds.rows],
    }
    return json.dumps(doc, sort_keys=True, indent=1, default=_json_default) + "\n"


def from_json(text: str) -> DatasetFile:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_TAG:
        raise DatasetFormatError("not a qthermo dataset")
    cols = doc["columns"]
    rows = np.array(doc["rows"], dtype=float).reshape(len(doc["rows"]), len(cols))
    return DatasetFile(cols, rows, doc["metadata"])


def serialize(ds: DatasetFile, fmt: str = "csv") -> str:
    if fmt == "csv":
        return to_csv(ds)
    if fmt == "json":
        return to_json(ds)
    raise DatasetFormatError(f"unknown format {fmt!r}")


def parse(text: str, fmt: str = "csv") -> DatasetFile:
    if fmt == "csv":
        return from_csv(text)
    if fmt == "json":
        return from_json(text)
    raise DatasetFormatError(f"unknown format {fmt!r}")


def write(ds: DatasetFile, path, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize(ds, fmt))
    return path


def read(path, fmt: str | None = None) -> DatasetFile:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    return parse(path.read_text(), fmt)


def sweep_to_dataset(table) -> DatasetFile:
    """Long format: one column per swept axis (first axis first), then the value."""
    names = [n for n, _ in table.axes] + [table.value_name]
    meta = dict(table.metadata)
    meta["axes"] = {n: len(g) for n, g in table.axes}
    return DatasetFile(names, np.array(list(table.rows())), meta)
