"""File formats.

* grid functions: CSV, one sample per line (line count a power of two)
* Haar coefficients: JSON {"J", "mean", "details"}
* multiplier sequences: JSON {"values", "tail"} or CSV, one value per line
* region diagrams: CSV with columns region, kind, index, inv_p, s
* sweep tables: CSV with columns size, value, kind, seed
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .dyadic import GridFunction, HaarCoefficients
from .variation import MultiplierSequence


class FormatError(ValueError):
    """An input file exists but does not parse."""


def _read_column(path) -> np.ndarray:
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            try:
                values.append(float(row[0]))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: not a number: {row[0]!r}") from exc
    return np.asarray(values)


def read_grid(path) -> GridFunction:
    try:
        return GridFunction(_read_column(path))
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def grid_csv(f: GridFunction) -> str:
    return "".join(f"{v!r}\n" for v in f.samples.tolist())


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def read_coefficients(path) -> HaarCoefficients:
    data = read_json(path)
    try:
        return HaarCoefficients.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def read_sequence(path) -> MultiplierSequence:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return MultiplierSequence(_read_column(path))
    data = read_json(path)
    try:
        if isinstance(data, list):
            return MultiplierSequence(data)
        return MultiplierSequence.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, inf/nan to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


def dumps(obj, indent=None) -> str:
    return json.dumps(_clean(obj), indent=indent) + "\n"


def diagram_csv(regions) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["region", "kind", "index", "inv_p", "s"])
    for reg in regions:
        for kind in ("vertex", "point"):
            pts = reg["vertices"] if kind == "vertex" else reg["points"]
            for i, (x, y) in enumerate(pts):
                writer.writerow([reg["label"], kind, i, repr(float(x)), repr(float(y))])
    return buf.getvalue()


def read_diagram_csv(text: str) -> dict:
    """Vertices per region label from diagram CSV text."""
    out: dict = {}
    for row in csv.DictReader(io.StringIO(text)):
        if row["kind"] == "vertex":
            out.setdefault(row["region"], []).append((float(row["inv_p"]), float(row["s"])))
    return out


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["size", "value", "kind", "seed"])
    for r in rows:
        writer.writerow([r["size"], repr(float(r["value"])), r["kind"], "" if r["seed"] is None else r["seed"]])
    return buf.getvalue()
