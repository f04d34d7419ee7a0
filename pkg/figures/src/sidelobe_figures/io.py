"""Readers for the sweep CSV/JSON file contracts.

These parse the documented formats only; nothing here imports the simulator.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

CSV_COLUMNS = ("x_m", "y_m", "psr")


class SchemaError(ValueError):
    """The file does not match the documented sweep output contract."""


@dataclass(frozen=True)
class HeatmapData:
    xs: np.ndarray  # sorted unique cell-center x coordinates
    ys: np.ndarray
    values: np.ndarray  # (len(ys), len(xs)) PSR matrix
    rows: tuple  # parsed (x, y, psr) triples in file order


def read_grid_csv(path: str) -> HeatmapData:
    """Parse an ``x_m,y_m,psr`` sweep CSV into a dense grid."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        for i, (got, want) in enumerate(zip(header, CSV_COLUMNS)):
            if got != want:
                raise SchemaError(
                    f"{path}: column {i + 1} is {got!r}, expected {want!r}")
        raise SchemaError(f"{path}: header has {len(header)} columns, "
                          f"expected {len(CSV_COLUMNS)}")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise SchemaError(f"{path}:{ln}: expected 3 fields, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError as e:
            raise SchemaError(f"{path}:{ln}: {e}") from e
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    arr = np.asarray(rows)
    xs = np.unique(arr[:, 0])
    ys = np.unique(arr[:, 1])
    if xs.size * ys.size != len(rows):
        raise SchemaError(f"{path}: {len(rows)} rows do not tile a "
                          f"{ys.size}x{xs.size} grid")
    values = np.full((ys.size, xs.size), np.nan)
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    for x, y, p in rows:
        values[yi[y], xi[x]] = p
    if np.isnan(values).any():
        raise SchemaError(f"{path}: duplicate cells leave grid holes")
    return HeatmapData(xs=xs, ys=ys, values=values, rows=tuple(rows))


def read_report(path: str) -> dict:
    """Parse a sweep report and return it with areas keyed by float threshold."""
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("areas_m2", "scenario", "rate_gbps", "variant"):
        if key not in doc:
            raise SchemaError(f"{path}: report missing {key!r}")
    doc["areas"] = sorted((float(t), float(a)) for t, a in doc["areas_m2"].items())
    return doc


def csv_digest(rows) -> str:
    """Canonical sha256 the sweep tool embeds in reports: parsed (x, y, psr)
    triples re-serialized at 6 decimal places."""
    h = hashlib.sha256()
    for x, y, p in rows:
        h.update(f"{x:.6f},{y:.6f},{p:.6f}\n".encode())
    return "sha256:" + h.hexdigest()


def verify_digest(csv_path: str, report_path: str) -> bool:
    """True when the report's embedded digest matches a fresh parse of the CSV."""
    grid = read_grid_csv(csv_path)
    doc = read_report(report_path)
    embedded = doc.get("csv_digest")
    if not embedded:
        raise SchemaError(f"{report_path}: report carries no csv_digest")
    return csv_digest(grid.rows) == embedded
