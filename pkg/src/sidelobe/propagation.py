"""Free-space link-budget arithmetic: path loss, noise floor, received SNR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_BANDWIDTH_HZ = 1.76e9  # 802.11ad single-carrier occupied bandwidth
DEFAULT_NOISE_FIGURE_DB = 7.0
THERMAL_NOISE_DBM_PER_HZ = -174.0


def fspl_db(distance_m, wavelength_m: float):
    """Friis free-space path loss, 20*log10(4*pi*d/lambda). Accepts arrays."""
    distance_m = np.asarray(distance_m, dtype=float)
    if np.any(distance_m <= 0):
        raise ValueError("distance_m must be > 0")
    if wavelength_m <= 0:
        raise ValueError("wavelength_m must be > 0")
    out = 20.0 * np.log10(4.0 * np.pi * distance_m / wavelength_m)
    return float(out) if out.ndim == 0 else out


def noise_floor_dbm(bandwidth_hz: float = DEFAULT_BANDWIDTH_HZ,
                    noise_figure_db: float = DEFAULT_NOISE_FIGURE_DB) -> float:
    """Thermal noise floor: -174 dBm/Hz + 10*log10(B) + NF."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth_hz must be > 0")
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


DEFAULT_NOISE_FLOOR_DBM = noise_floor_dbm()


@dataclass(frozen=True)
class LinkBudget:
    """One receiver's budget. ``tx_gain_offset_db`` is the TX pattern gain at
    the receiver's direction relative to the pattern peak (<= 0); EIRP already
    contains the peak TX gain."""

    eirp_dbm: float
    tx_gain_offset_db: float
    rx_gain_dbi: float
    distance_m: float
    wavelength_m: float
    noise_floor_dbm: float = DEFAULT_NOISE_FLOOR_DBM

    def __post_init__(self):
        if self.distance_m <= 0:
            raise ValueError("distance_m must be > 0")
        if self.tx_gain_offset_db > 0:
            raise ValueError("tx_gain_offset_db must be <= 0")


def received_power_dbm(lb: LinkBudget) -> float:
    return lb.eirp_dbm + lb.tx_gain_offset_db - fspl_db(lb.distance_m, lb.wavelength_m)


def snr_db(lb: LinkBudget) -> float:
    return received_power_dbm(lb) + lb.rx_gain_dbi - lb.noise_floor_dbm


def rx_array_gain_dbi(n_elements: int, element_gain_dbi: float = 0.0) -> float:
    """Peak gain of an N-element receive array pointed at the transmitter."""
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    return 10.0 * np.log10(n_elements) + element_gain_dbi
