"""Grid sweeps: per-cell attacker PSR, eavesdropping areas, connected regions."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .arraymodel import Direction, PhasedArray, gain_db_many, steer
from .linkabstraction import RateProfile, psr_from_snr
from .propagation import DEFAULT_NOISE_FLOOR_DBM, fspl_db, rx_array_gain_dbi
from .scenario import Scenario, cell_centers, geometry_many

# Thresholds mirroring the ">10% / >50% / >95%" reporting columns; the first
# entry stands for "decoded at least one packet out of 100k".
PSR_FLOOR = 1e-3
DEFAULT_THRESHOLDS = (PSR_FLOOR, 0.1, 0.5, 0.95)

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass(frozen=True)
class PsrGrid:
    """Per-cell packet success rate over the examined rectangle.

    ``values`` is (rows, cols), row-major in the same order as
    :func:`sidelobe.scenario.cell_centers`.
    """

    scenario_name: str
    cols: int
    rows: int
    cell_area_m2: float
    values: np.ndarray
    area: tuple[float, float, float, float]
    attacker_height_m: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (self.rows, self.cols):
            raise ValueError(f"values shape {values.shape} != "
                             f"({self.rows}, {self.cols})")
        if np.any(values < 0) or np.any(values > 1):
            raise ValueError("PSR values must lie in [0, 1]")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class EavesdropReport:
    areas_m2: dict  # threshold -> area
    components: list  # (area_m2, cell_count) at components_threshold
    components_threshold: float
    parameters: dict = field(default_factory=dict)


def sweep_psr(s: Scenario, tx_array: PhasedArray, profile: RateProfile,
              noise_floor: float = DEFAULT_NOISE_FLOOR_DBM) -> PsrGrid:
    """Attacker PSR at every grid cell.

    Per cell: TX-frame geometry -> pattern gain toward the cell -> Friis SNR
    -> logistic PSR. Fully vectorized and deterministic; the attacker aims at
    TX, so its receive gain is the peak gain of a radio matching ``tx_array``.
    """
    pts = cell_centers(s)
    dist, az, el = geometry_many(s, pts)
    weights = steer(tx_array, Direction(0.0, 0.0))
    offset = gain_db_many(tx_array, weights, az, el)
    snr = (s.eirp_dbm + offset + rx_array_gain_dbi(tx_array.size)
           - fspl_db(dist, tx_array.wavelength) - noise_floor)
    values = psr_from_snr(snr, profile).reshape(s.grid_rows, s.grid_cols)
    return PsrGrid(scenario_name=s.name, cols=s.grid_cols, rows=s.grid_rows,
                   cell_area_m2=s.cell_area_m2, values=values, area=s.area,
                   attacker_height_m=s.attacker_height_m)


def _check_threshold(threshold: float):
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must be in [0, 1), got {threshold}")


def area_above(g: PsrGrid, threshold: float) -> float:
    """Total area of cells with PSR strictly above ``threshold``."""
    _check_threshold(threshold)
    return g.cell_area_m2 * int(np.sum(g.values > threshold))


def connected_components(g: PsrGrid, threshold: float) -> list[tuple[float, int]]:
    """4-connected regions of cells above ``threshold``.

    Returns (area_m2, cell_count) pairs, largest first.
    """
    _check_threshold(threshold)
    labels, count = ndimage.label(g.values > threshold, structure=FOUR_CONNECTED)
    sizes = np.bincount(labels.ravel())[1:]  # skip background
    comps = [(g.cell_area_m2 * int(n), int(n)) for n in sizes]
    comps.sort(key=lambda c: -c[1])
    return comps


def area_vs_threshold_curve(g: PsrGrid, thresholds, components_at: float | None = None,
                            parameters: dict | None = None) -> EavesdropReport:
    """Eavesdropping area at each threshold plus the region breakdown.

    ``thresholds`` must be sorted ascending; ``components_at`` defaults to the
    lowest threshold.
    """
    thresholds = [float(t) for t in thresholds]
    if sorted(thresholds) != thresholds:
        raise ValueError("thresholds must be sorted ascending")
    if components_at is None:
        components_at = thresholds[0]
    areas = {t: area_above(g, t) for t in thresholds}
    return EavesdropReport(areas_m2=areas,
                           components=connected_components(g, components_at),
                           components_threshold=float(components_at),
                           parameters=dict(parameters or {}))


# ---------------------------------------------------------------------------
# File emission. These formats are consumed by the figures tool and golden
# tests; changing them is a contract change.

def grid_csv_text(g: PsrGrid) -> str:
    """CSV body ``x_m,y_m,psr`` with 6 decimal places, cells in row-major order."""
    x0, x1, y0, y1 = g.area
    xs = x0 + (np.arange(g.cols) + 0.5) * (x1 - x0) / g.cols
    ys = y0 + (np.arange(g.rows) + 0.5) * (y1 - y0) / g.rows
    lines = ["x_m,y_m,psr"]
    for iy in range(g.rows):
        for ix in range(g.cols):
            lines.append(f"{xs[ix]:.6f},{ys[iy]:.6f},{g.values[iy, ix]:.6f}")
    return "\n".join(lines) + "\n"


def csv_digest(rows) -> str:
    """Canonical sha256 over (x, y, psr) float triples at 6 decimal places.

    Both the sweep CLI (which embeds this in reports) and any downstream
    consumer reformat parsed values through the same ``%.6f`` canon, so the
    digest is stable across parsers.
    """
    h = hashlib.sha256()
    for x, y, p in rows:
        h.update(f"{x:.6f},{y:.6f},{p:.6f}\n".encode())
    return "sha256:" + h.hexdigest()


def grid_digest(g: PsrGrid) -> str:
    body = grid_csv_text(g).splitlines()[1:]
    return csv_digest(tuple(float(v) for v in line.split(",")) for line in body)


def report_document(g: PsrGrid, report: EavesdropReport, rate_gbps: float,
                    variant: str) -> dict:
    """JSON-ready report: areas, components, digest, full parameter echo."""
    return {
        "scenario": g.scenario_name,
        "rate_gbps": rate_gbps,
        "variant": variant,
        "grid": {"cols": g.cols, "rows": g.rows},
        "cell_area_m2": round(g.cell_area_m2, 9),
        "area_rect_m": list(g.area),
        "attacker_height_m": g.attacker_height_m,
        "areas_m2": {f"{t:.6g}": round(a, 6) for t, a in report.areas_m2.items()},
        "components": {
            "threshold": report.components_threshold,
            "items": [{"area_m2": round(a, 6), "cells": n}
                      for a, n in report.components],
        },
        "csv_digest": grid_digest(g),
        "parameters": report.parameters,
    }


def dump_json(doc: dict) -> str:
    """Deterministic JSON serialization used for every emitted document."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
