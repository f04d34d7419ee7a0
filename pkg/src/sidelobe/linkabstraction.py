"""SNR -> packet-success-rate mapping.

The real testbed correlation behind this mapping is not public, so the link is
abstracted by a logistic curve in dB, calibrated so that the victim receiver
meets its packet-loss budget at each deployment's rated throughput. This is
the central modeling substitution of the simulator: absolute areas depend on
it, trends do not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationError

DEFAULT_SLOPE_DB = 1.0
DEFAULT_MARGIN_DB = 1.0
# Extra SNR required per 0.5 Gbps rate step (QPSK code-rate style gap).
RATE_GAP_DB = 3.0
RATE_STEP_GBPS = 0.5
# No useful QPSK curve has its midpoint below this.
SNR50_FLOOR_DB = 0.0


@dataclass(frozen=True)
class RateProfile:
    name: str
    rate_gbps: float
    snr50_db: float  # SNR at which PSR = 0.5
    slope_db: float = DEFAULT_SLOPE_DB

    def __post_init__(self):
        if self.slope_db <= 0:
            raise ValueError("slope_db must be > 0")


def psr_from_snr(snr_db, profile: RateProfile):
    """Logistic PSR: 1 / (1 + exp(-(snr - snr50)/slope)). Accepts arrays."""
    snr_db = np.asarray(snr_db, dtype=float)
    out = 1.0 / (1.0 + np.exp(-(snr_db - profile.snr50_db) / profile.slope_db))
    return float(out) if out.ndim == 0 else out


def calibrate(scenario, target_psr: float, tx_array=None, rate_gbps: float | None = None,
              slope_db: float = DEFAULT_SLOPE_DB, margin_db: float = DEFAULT_MARGIN_DB,
              rate_gap_db: float = RATE_GAP_DB) -> RateProfile:
    """Anchor a rate profile to a scenario's victim geometry.

    The curve midpoint at the scenario's rated max throughput is placed
    ``slope * logit(target_psr) + margin_db`` below the victim's simulated
    SNR, so the victim meets ``target_psr`` with ``margin_db`` of headroom.
    Profiles for other rates shift by ``rate_gap_db`` per 0.5 Gbps step, so
    within one calibration higher rates always have higher midpoints.

    Raises CalibrationError when the resulting midpoint falls below the
    floor, i.e. the victim SNR cannot support the rate at the target.
    """
    from . import scenario as _scenario

    if not 0.0 < target_psr < 1.0:
        raise CalibrationError(f"target_psr must be in (0, 1), got {target_psr}")
    if slope_db <= 0:
        raise CalibrationError("slope_db must be > 0")
    if rate_gbps is None:
        rate_gbps = scenario.rate.rate_gbps
    victim = _scenario.victim_snr_db(scenario, tx_array)
    logit = float(np.log(target_psr / (1.0 - target_psr)))
    anchor = victim - slope_db * logit - margin_db
    snr50 = anchor + rate_gap_db * (rate_gbps - scenario.max_rate_gbps) / RATE_STEP_GBPS
    if snr50 < SNR50_FLOOR_DB:
        raise CalibrationError(
            f"victim SNR {victim:.1f} dB cannot support {rate_gbps} Gbps at "
            f"PSR {target_psr} (midpoint {snr50:.1f} dB below floor)")
    return RateProfile(name=f"{scenario.name}-{rate_gbps}gbps",
                       rate_gbps=float(rate_gbps), snr50_db=float(snr50),
                       slope_db=float(slope_db))
