"""Rectangular phased arrays: steering, array factor, relative gain, hardware artifacts.

Geometry convention (array-local frame): x is boresight, y spans the columns
(horizontal), z spans the rows (vertical). Element positions are centered on
the array's geometric center, so a boresight steering vector is all-ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_CARRIER_HZ = 60.48e9  # 802.11ad channel 2 center
DEFAULT_WAVELENGTH_M = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ

# Pattern nulls are reported at this floor instead of -inf.
GAIN_FLOOR_DB = -80.0


@dataclass(frozen=True)
class Direction:
    """Look direction relative to the array boresight, in radians."""

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not -np.pi <= self.azimuth <= np.pi:
            raise ValueError(f"azimuth {self.azimuth} outside [-pi, pi]")
        if not -np.pi / 2 <= self.elevation <= np.pi / 2:
            raise ValueError(f"elevation {self.elevation} outside [-pi/2, pi/2]")

    @classmethod
    def from_degrees(cls, azimuth_deg: float, elevation_deg: float = 0.0) -> "Direction":
        return cls(np.deg2rad(azimuth_deg), np.deg2rad(elevation_deg))


BORESIGHT = Direction(0.0, 0.0)


@dataclass(frozen=True)
class ArtifactModel:
    """Per-element i.i.d. amplitude/phase perturbation model.

    Amplitude errors are log-normal (``amp_sigma_db`` is the standard deviation
    of the per-element gain in dB), phase errors are Gaussian with standard
    deviation ``phase_sigma_deg``. The same seed always yields the same errors.
    """

    amp_sigma_db: float = 0.0
    phase_sigma_deg: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.amp_sigma_db < 0 or self.phase_sigma_deg < 0:
            raise ValueError("artifact sigmas must be >= 0")


def measured_like(seed: int = 0) -> ArtifactModel:
    """Calibration stand-in for real-hardware distortion (1 dB / 10 deg).

    The true per-element error statistics of production 60 GHz arrays are not
    public; this preset is tuned to raise side lobes without moving the main
    lobe and is meant to be swapped for measured values when available.
    """
    return ArtifactModel(amp_sigma_db=1.0, phase_sigma_deg=10.0, seed=seed)


class PhasedArray:
    """Immutable rows x cols rectangular array with per-element complex errors.

    ``cols`` counts elements along the horizontal axis, ``rows`` along the
    vertical axis; a "16x8" radio has ``cols=16, rows=8``. ``spacing`` is the
    element pitch in carrier wavelengths.
    """

    def __init__(self, rows: int, cols: int, spacing: float = 0.5,
                 wavelength: float = DEFAULT_WAVELENGTH_M,
                 element_errors: np.ndarray | None = None):
        if rows < 1 or cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if spacing <= 0 or wavelength <= 0:
            raise ValueError("spacing and wavelength must be > 0")
        self.rows = int(rows)
        self.cols = int(cols)
        self.spacing = float(spacing)
        self.wavelength = float(wavelength)
        n = self.rows * self.cols
        pitch = self.spacing * self.wavelength
        jj, ii = np.meshgrid(np.arange(self.rows), np.arange(self.cols), indexing="ij")
        self._positions = np.column_stack([
            np.zeros(n),
            (ii.ravel() - (self.cols - 1) / 2.0) * pitch,
            (jj.ravel() - (self.rows - 1) / 2.0) * pitch,
        ])
        self._positions.flags.writeable = False
        if element_errors is None:
            element_errors = np.ones(n, dtype=complex)
        else:
            element_errors = np.asarray(element_errors, dtype=complex).copy()
            if element_errors.shape != (n,):
                raise ValueError(f"element_errors must have shape ({n},)")
        self._errors = element_errors
        self._errors.flags.writeable = False

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def positions(self) -> np.ndarray:
        """Element positions in meters, shape (N, 3), local frame."""
        return self._positions

    @property
    def element_errors(self) -> np.ndarray:
        return self._errors

    @property
    def is_perfect(self) -> bool:
        return bool(np.all(self._errors == 1.0))

    def __repr__(self):
        kind = "perfect" if self.is_perfect else "perturbed"
        return f"PhasedArray({self.rows}x{self.cols}, spacing={self.spacing}, {kind})"


def unit_vector(azimuth, elevation) -> np.ndarray:
    """Unit propagation vector(s) for azimuth/elevation in the local frame."""
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    return np.stack([np.cos(el) * np.cos(az),
                     np.cos(el) * np.sin(az),
                     np.sin(el)], axis=-1)


def steer(array: PhasedArray, target: Direction) -> np.ndarray:
    """Conjugate-phase steering weights (unit magnitude) aligned at ``target``."""
    u = unit_vector(target.azimuth, target.elevation)
    phase = 2.0 * np.pi / array.wavelength * (array.positions @ u)
    return np.exp(-1j * phase)


def response_matrix(array: PhasedArray, azimuth, elevation) -> np.ndarray:
    """Per-element complex response at the given direction(s), error included.

    Returns shape (..., N) where leading dimensions follow the broadcast shape
    of ``azimuth``/``elevation``. Row k dotted with a weight vector is the
    array factor at direction k; this is the vectorized workhorse behind
    :func:`array_factor` and the sweep engine.
    """
    u = unit_vector(azimuth, elevation)
    phase = 2.0 * np.pi / array.wavelength * (u @ array.positions.T)
    return array.element_errors * np.exp(1j * phase)


def array_factor(array: PhasedArray, weights: np.ndarray, d: Direction) -> complex:
    """Complex array factor of ``weights`` at direction ``d``.

    AF = sum_n w_n * e_n * exp(j * 2*pi/lambda * p_n . u(d)), with e_n the
    per-element error. Raises ValueError on weight-length mismatch.
    """
    weights = _check_weights(array, weights)
    return complex(response_matrix(array, d.azimuth, d.elevation) @ weights)


def array_factor_many(array: PhasedArray, weights: np.ndarray,
                      azimuth, elevation) -> np.ndarray:
    """Vectorized :func:`array_factor` over arrays of angles (radians)."""
    weights = _check_weights(array, weights)
    return response_matrix(array, azimuth, elevation) @ weights


def peak_amplitude(array: PhasedArray, weights: np.ndarray) -> float:
    """Upper bound sum_n |w_n * e_n| on |AF|, attained by a steered perfect array."""
    weights = _check_weights(array, weights)
    return float(np.abs(weights * array.element_errors).sum())


def gain_db(array: PhasedArray, weights: np.ndarray, d: Direction,
            floor_db: float = GAIN_FLOOR_DB) -> float:
    """Pattern gain at ``d`` in dB relative to the pattern peak (<= 0).

    Normalized by :func:`peak_amplitude`, which equals the realized peak for a
    perfect steered array; power at the peak itself is specified externally as
    EIRP, so only this relative shape enters the link budget. Exact nulls are
    clipped to ``floor_db``.
    """
    return float(gain_db_many(array, weights, d.azimuth, d.elevation, floor_db=floor_db))


def gain_db_many(array: PhasedArray, weights: np.ndarray, azimuth, elevation,
                 floor_db: float = GAIN_FLOOR_DB) -> np.ndarray:
    """Vectorized :func:`gain_db` over arrays of angles (radians)."""
    peak = peak_amplitude(array, weights)
    amp = np.abs(array_factor_many(array, weights, azimuth, elevation))
    with np.errstate(divide="ignore"):
        g = 20.0 * np.log10(amp / peak)
    return np.maximum(g, floor_db)


def apply_artifacts(array: PhasedArray, model: ArtifactModel) -> PhasedArray:
    """New array whose element errors are drawn from ``model`` (seeded).

    Zero sigmas return an array identical to the input. Errors are drawn
    i.i.d.: gain ~ Normal(0, amp_sigma_db) in dB, phase ~ Normal(0,
    phase_sigma_deg) in degrees, and multiply any errors already present.
    """
    if model.amp_sigma_db == 0.0 and model.phase_sigma_deg == 0.0:
        return PhasedArray(array.rows, array.cols, array.spacing,
                           array.wavelength, array.element_errors)
    rng = np.random.default_rng(model.seed)
    n = array.size
    amp = 10.0 ** (rng.normal(0.0, model.amp_sigma_db, n) / 20.0)
    phase = np.deg2rad(rng.normal(0.0, model.phase_sigma_deg, n))
    errors = array.element_errors * amp * np.exp(1j * phase)
    return PhasedArray(array.rows, array.cols, array.spacing,
                       array.wavelength, errors)


def _check_weights(array: PhasedArray, weights: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=complex)
    if weights.shape != (array.size,):
        raise ValueError(
            f"weight vector has shape {weights.shape}, expected ({array.size},)")
    return weights
