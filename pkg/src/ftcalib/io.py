"""File formats: dataset CSV, workbench matrix CSV, calibration JSON.

Dataset CSV
    Optional ``# key: value`` metadata lines (values JSON-encoded), then the
    header ``time,r0,r1,r2,r3,r4,r5,temp,fx,fy,fz,tx,ty,tz`` and one sample
    per line. UTF-8, ``.`` decimal separator.

Workbench CSV
    Six lines of six comma-separated values, row-major.

All writers go through :func:`atomic_write_text`.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import CalibrationModel, Dataset

DATASET_HEADER = ("time", "r0", "r1", "r2", "r3", "r4", "r5", "temp", "fx", "fy", "fz", "tx", "ty", "tz")


def atomic_write_text(path, text: str):
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x) -> str:
    return repr(float(x))


def format_dataset(dataset: Dataset) -> str:
    meta = {"name": dataset.name, "kind": dataset.kind, **dataset.meta}
    lines = [f"# {key}: {json.dumps(meta[key], sort_keys=True)}" for key in meta]
    lines.append(",".join(DATASET_HEADER))
    for t, r, temp, f in zip(dataset.time, dataset.raw, dataset.temperature, dataset.reference):
        lines.append(",".join([_num(t), *map(_num, r), _num(temp), *map(_num, f)]))
    return "\n".join(lines) + "\n"


def write_dataset(dataset: Dataset, path):
    atomic_write_text(path, format_dataset(dataset))


def parse_dataset(text: str, default_name="") -> Dataset:
    meta = {}
    rows = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if not header_seen:
            if line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if sep:
                    value = value.strip()
                    try:
                        meta[key.strip()] = json.loads(value)
                    except json.JSONDecodeError:
                        meta[key.strip()] = value
                continue
            if tuple(c.strip() for c in line.split(",")) != DATASET_HEADER:
                raise DataError(f"line {lineno}: expected header {','.join(DATASET_HEADER)!r}")
            header_seen = True
            continue
        fields = line.split(",")
        if len(fields) != len(DATASET_HEADER):
            raise DataError(f"line {lineno}: expected {len(DATASET_HEADER)} fields, got {len(fields)}")
        try:
            rows.append([float(v) for v in fields])
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
    if not header_seen:
        raise DataError("missing dataset header")
    if not rows:
        raise DataError("dataset has no samples")
    a = np.array(rows)
    name = str(meta.pop("name", default_name))
    kind = str(meta.pop("kind", "custom"))
    return Dataset(a[:, 0], a[:, 1:7], a[:, 7], a[:, 8:14], kind=kind, name=name, meta=meta)


def read_dataset(path) -> Dataset:
    path = Path(path)
    return parse_dataset(path.read_text(encoding="utf-8"), default_name=path.stem)


def read_workbench(path) -> np.ndarray:
    rows = [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    try:
        C = np.array([[float(v) for v in line.split(",")] for line in rows])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if C.shape != (6, 6):
        raise DataError(f"{path}: workbench matrix must be 6 lines of 6 values, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise DataError(f"{path}: workbench matrix has non-finite entries")
    return C


def write_workbench(C, path):
    C = np.asarray(C, dtype=float)
    atomic_write_text(path, "".join(",".join(_num(v) for v in row) + "\n" for row in C))


def read_model(path) -> CalibrationModel:
    return CalibrationModel.from_json(Path(path).read_text(encoding="utf-8"))


def write_model(model: CalibrationModel, path):
    atomic_write_text(path, model.to_json())
