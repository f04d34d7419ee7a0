"""Deployment geometries and the world <-> TX-array-frame conversions.

World frame: TX sits on the z axis at its mount height, the victim RX lies on
the +x axis, z is up. The examined attacker area is a ground-plane rectangle
gridded into equal cells; the attacker device at each cell center points
straight back at TX.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .arraymodel import Direction, PhasedArray, steer, gain_db
from .errors import ConfigurationError
from .linkabstraction import RateProfile, calibrate
from .propagation import (DEFAULT_NOISE_FLOOR_DBM, LinkBudget, rx_array_gain_dbi,
                          snr_db)

GRID_COLS = 34  # cells along x
GRID_ROWS = 24  # cells along y
DEFAULT_ATTACKER_HEIGHT_M = 1.0
PRESET_NAMES = ("mesh", "picocell", "p2p")


@dataclass(frozen=True)
class Pose:
    """Position in meters plus a world-frame boresight direction."""

    position: tuple[float, float, float]
    boresight: Direction

    def __post_init__(self):
        if self.position[2] < 0:
            raise ValueError("height must be >= 0")

    @property
    def xyz(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)


@dataclass(frozen=True)
class Scenario:
    name: str
    tx: Pose
    rx: Pose
    eirp_dbm: float
    rate: RateProfile
    max_rate_gbps: float  # Table-style rated throughput; calibration anchor
    area: tuple[float, float, float, float]  # x_min, x_max, y_min, y_max
    grid_cols: int = GRID_COLS
    grid_rows: int = GRID_ROWS
    attacker_height_m: float = DEFAULT_ATTACKER_HEIGHT_M

    def __post_init__(self):
        x0, x1, y0, y1 = self.area
        if x1 <= x0 or y1 <= y0:
            raise ValueError("area rectangle must have positive extent")
        if self.grid_cols < 1 or self.grid_rows < 1:
            raise ValueError("grid dimensions must be >= 1")

    @property
    def cell_count(self) -> int:
        return self.grid_cols * self.grid_rows

    @property
    def cell_area_m2(self) -> float:
        x0, x1, y0, y1 = self.area
        return (x1 - x0) / self.grid_cols * (y1 - y0) / self.grid_rows


def _aim(from_xyz: np.ndarray, at_xyz: np.ndarray) -> Direction:
    v = at_xyz - from_xyz
    az = float(np.arctan2(v[1], v[0]))
    el = float(np.arcsin(np.clip(v[2] / np.linalg.norm(v), -1.0, 1.0)))
    return Direction(az, el)


# EIRP dBm, TX height, RX distance, RX height, rated Gbps, area rectangle
_PRESETS = {
    "mesh": (32.0, 6.0, 200.0, 6.0, 1.0, (0.0, 20.0, -5.0, 5.0)),
    "picocell": (32.0, 6.0, 50.0, 1.0, 1.5, (0.0, 20.0, -5.0, 5.0)),
    "p2p": (23.0, 1.0, 10.0, 1.0, 1.5, (0.0, 5.0, -2.0, 2.0)),
}


def preset(name: str, attacker_height_m: float = DEFAULT_ATTACKER_HEIGHT_M,
           rate_gbps: float | None = None, calibration_array: PhasedArray | None = None,
           target_psr: float = 0.95) -> Scenario:
    """Build one of the three canonical deployments, link curve calibrated.

    ``rate_gbps`` selects the simulated rate (defaults to the deployment's
    rated max); ``calibration_array`` is the radio hardware assumed on both
    ends when anchoring the SNR->PSR curve (defaults to the stock 16x8).
    """
    if name not in _PRESETS:
        raise ConfigurationError(
            f"unknown scenario {name!r}, expected one of {', '.join(PRESET_NAMES)}")
    eirp, h_tx, d_rx, h_rx, max_rate, area = _PRESETS[name]
    tx_xyz = np.array([0.0, 0.0, h_tx])
    rx_xyz = np.array([d_rx, 0.0, h_rx])
    tx = Pose((0.0, 0.0, h_tx), _aim(tx_xyz, rx_xyz))
    rx = Pose((d_rx, 0.0, h_rx), _aim(rx_xyz, tx_xyz))
    if rate_gbps is None:
        rate_gbps = max_rate
    provisional = RateProfile(f"{name}-uncalibrated", float(rate_gbps), snr50_db=0.0)
    s = Scenario(name=name, tx=tx, rx=rx, eirp_dbm=eirp, rate=provisional,
                 max_rate_gbps=max_rate, area=area,
                 attacker_height_m=float(attacker_height_m))
    profile = calibrate(s, target_psr, tx_array=calibration_array, rate_gbps=rate_gbps)
    return replace(s, rate=profile)


def tx_frame(s: Scenario) -> np.ndarray:
    """Orthonormal TX array axes as rows: boresight, horizontal, vertical.

    The array is mounted roll-free: its horizontal axis stays parallel to the
    ground regardless of boresight tilt.
    """
    b = s.tx.boresight
    x = np.array([np.cos(b.elevation) * np.cos(b.azimuth),
                  np.cos(b.elevation) * np.sin(b.azimuth),
                  np.sin(b.elevation)])
    zw = np.array([0.0, 0.0, 1.0])
    y = np.cross(zw, x)
    ny = np.linalg.norm(y)
    if ny < 1e-12:
        raise ValueError("boresight may not point straight up or down")
    y /= ny
    z = np.cross(x, y)
    return np.vstack([x, y, z])


def cell_centers(s: Scenario) -> np.ndarray:
    """Attacker-cell centers, shape (rows*cols, 3), row-major (y outer, x inner)."""
    x0, x1, y0, y1 = s.area
    xs = x0 + (np.arange(s.grid_cols) + 0.5) * (x1 - x0) / s.grid_cols
    ys = y0 + (np.arange(s.grid_rows) + 0.5) * (y1 - y0) / s.grid_rows
    xx, yy = np.meshgrid(xs, ys)  # (rows, cols)
    zz = np.full(xx.size, s.attacker_height_m)
    return np.column_stack([xx.ravel(), yy.ravel(), zz])


def geometry_many(s: Scenario, points: np.ndarray):
    """Distances and TX-array-frame angles for points of shape (n, 3).

    Returns (distance_m, azimuth_rad, elevation_rad) arrays. The TX array is
    steered at the victim, so the victim itself comes out at (0, 0).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    v = points - s.tx.xyz
    dist = np.linalg.norm(v, axis=1)
    if np.any(dist == 0):
        raise ValueError("point coincides with the TX position")
    frame = tx_frame(s)
    local = (v / dist[:, None]) @ frame.T
    az = np.arctan2(local[:, 1], local[:, 0])
    el = np.arcsin(np.clip(local[:, 2], -1.0, 1.0))
    return dist, az, el


def geometry_to(s: Scenario, point) -> tuple[float, Direction]:
    """Distance and TX-array-frame direction of one world point."""
    dist, az, el = geometry_many(s, np.asarray(point, dtype=float)[None, :])
    return float(dist[0]), Direction(float(az[0]), float(el[0]))


def victim_snr_db(s: Scenario, tx_array: PhasedArray | None = None,
                  noise_floor: float = DEFAULT_NOISE_FLOOR_DBM) -> float:
    """Victim RX SNR through the full pipeline (pattern + Friis + noise floor).

    Both ends are assumed to use identical radios, so the receive gain is the
    peak gain of an array the size of ``tx_array``.
    """
    if tx_array is None:
        tx_array = PhasedArray(rows=8, cols=16)
    dist, direction = geometry_to(s, s.rx.xyz)
    weights = steer(tx_array, Direction(0.0, 0.0))
    offset = gain_db(tx_array, weights, direction)
    lb = LinkBudget(eirp_dbm=s.eirp_dbm, tx_gain_offset_db=min(offset, 0.0),
                    rx_gain_dbi=rx_array_gain_dbi(tx_array.size),
                    distance_m=dist, wavelength_m=tx_array.wavelength,
                    noise_floor_dbm=noise_floor)
    return snr_db(lb)
