"""Symbol-level QPSK simulation over the array channel.

The sweep engine computes PSR analytically; this module exists for the
defense/attack studies where per-symbol weight changes and artificial noise
matter. Channel model: flat LoS, one complex tap per receiver equal to the
(normalized) array factor toward it, plus circular complex Gaussian noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arraymodel import PhasedArray, array_factor_many
from .errors import EstimationError

QPSK = np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))
PILOT_LEN = 64

# Parallel Monte Carlo batches derive their streams as master_seed + index.
def batch_seed(master_seed: int, batch_index: int) -> int:
    return int(master_seed) + int(batch_index)


@dataclass(frozen=True)
class PacketModel:
    symbols_per_packet: int = 1024

    def __post_init__(self):
        if self.symbols_per_packet < 1:
            raise ValueError("symbols_per_packet must be >= 1")


@dataclass(frozen=True)
class SymbolTrace:
    """Observed baseband samples: ``samples[d, t]`` for device d, symbol t."""

    samples: np.ndarray
    truth: np.ndarray  # transmitted QPSK indices in {0..3}
    noise_sigma: np.ndarray  # per-device complex noise std

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=complex)).copy()
        truth = np.asarray(self.truth, dtype=int).copy()
        sigma = np.atleast_1d(np.asarray(self.noise_sigma, dtype=float)).copy()
        if samples.shape != (sigma.size, truth.size):
            raise ValueError("samples must be (device_count, symbol_count)")
        if truth.size and (truth.min() < 0 or truth.max() > 3):
            raise ValueError("truth indices must be in {0, 1, 2, 3}")
        for a in (samples, truth, sigma):
            a.flags.writeable = False
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "noise_sigma", sigma)

    @property
    def device_count(self) -> int:
        return self.samples.shape[0]

    @property
    def symbol_count(self) -> int:
        return self.samples.shape[1]

    def device(self, d: int) -> "SymbolTrace":
        return SymbolTrace(self.samples[d:d + 1], self.truth, self.noise_sigma[d:d + 1])


def modulate(indices) -> np.ndarray:
    return QPSK[np.asarray(indices, dtype=int)]


def random_symbols(count: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 4, count)


def channel_gains(array: PhasedArray, weights: np.ndarray, directions) -> np.ndarray:
    """Normalized per-direction taps AF(w, dir)/N for a list of Directions."""
    az = np.array([d.azimuth for d in directions])
    el = np.array([d.elevation for d in directions])
    return array_factor_many(array, weights, az, el) / array.size


def transmit(symbols, schedule, rx_directions, array: PhasedArray, snr_db,
             seed: int = 0, noise_precoders: np.ndarray | None = None,
             snr_ref_gains=None) -> SymbolTrace:
    """Simulate reception of ``symbols`` at one or more synchronized devices.

    ``schedule`` is a WeightSchedule (or any object with ``channels(array,
    directions)`` returning per-symbol taps). ``snr_db`` is per device and is
    referenced to that device's no-defense channel: noise is scaled so an
    undefended constant-weight trace measures exactly the requested SNR.
    ``snr_ref_gains`` overrides the reference amplitudes, e.g. to give a
    receiver parked in a pattern null the same thermal floor as its sibling.
    ``noise_precoders`` (chains x N), if given, inject artificial noise
    streams through the same array; synchronized devices see the same noise
    waveforms through their own pattern gains.

    Deterministic for a fixed seed; devices get independent receiver noise.
    """
    symbols = np.asarray(symbols, dtype=int)
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    directions = list(rx_directions)
    if snr_db.size != len(directions):
        raise ValueError("need one SNR per receive direction")
    h = schedule.channels(array, directions)  # (symbols, devices)
    if h.shape != (symbols.size, len(directions)):
        raise ValueError(f"schedule produced channel shape {h.shape}, expected "
                         f"({symbols.size}, {len(directions)})")
    if snr_ref_gains is None:
        h_ref = np.abs(channel_gains(array, schedule.base_weights, directions))
    else:
        h_ref = np.atleast_1d(np.asarray(snr_ref_gains, dtype=float))
    if h_ref.size != len(directions) or np.any(h_ref <= 0):
        raise ValueError("SNR reference gains must be positive, one per device")
    sigma = h_ref * 10.0 ** (-snr_db / 20.0)
    rng = np.random.default_rng(seed)
    s = modulate(symbols)
    y = h.T * s[None, :]
    if noise_precoders is not None:
        q = np.atleast_2d(np.asarray(noise_precoders, dtype=complex))
        g = np.array([channel_gains(array, qc, directions) for qc in q])  # (chains, dev)
        nu = (rng.standard_normal((q.shape[0], symbols.size))
              + 1j * rng.standard_normal((q.shape[0], symbols.size))) / np.sqrt(2.0)
        y = y + g.T @ nu
    noise = (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)) / np.sqrt(2.0)
    y = y + sigma[:, None] * noise
    return SymbolTrace(samples=y, truth=symbols, noise_sigma=sigma)


def decide(equalized: np.ndarray) -> np.ndarray:
    """Nearest-constellation decision on already-equalized samples."""
    return np.argmin(np.abs(equalized[..., None] - QPSK), axis=-1)


def demodulate(trace: SymbolTrace, channel_estimate) -> tuple[np.ndarray, float]:
    """Equalize with the per-device estimates, MRC-combine, and slice.

    Returns (decisions, symbol error rate). For a single device this is plain
    one-tap equalization; for several, maximum-ratio combining weighted by the
    per-device noise power.
    """
    h = np.atleast_1d(np.asarray(channel_estimate, dtype=complex))
    if h.size != trace.device_count:
        raise ValueError("need one channel estimate per device")
    if np.any(h == 0):
        raise ValueError("zero channel estimate")
    w = np.conj(h) / trace.noise_sigma ** 2
    combined = (w[:, None] * trace.samples).sum(axis=0) / (w * h).real.sum()
    decisions = decide(combined)
    ser = float(np.mean(decisions != trace.truth))
    return decisions, ser


def pilot_estimate(trace: SymbolTrace, pilot_len: int = PILOT_LEN) -> np.ndarray:
    """Least-squares per-device channel estimate from the leading pilots."""
    pilot_len = min(pilot_len, trace.symbol_count)
    s = modulate(trace.truth[:pilot_len])
    est = trace.samples[:, :pilot_len] @ np.conj(s) / float(np.sum(np.abs(s) ** 2))
    if np.all(est == 0):
        raise EstimationError("pilot estimate is zero (all-zero trace?)")
    return est


def psr_from_ser(ser: float, pm: PacketModel = PacketModel()) -> float:
    """Packet success probability (1 - ser)^symbols_per_packet."""
    if not 0.0 <= ser <= 1.0:
        raise ValueError("ser must be in [0, 1]")
    return float((1.0 - ser) ** pm.symbols_per_packet)


def awgn_qpsk_ser(snr_db: float) -> float:
    """Analytic QPSK symbol error rate 2Q(sqrt(g)) - Q(sqrt(g))^2 at Es/N0 = g."""
    from scipy.special import erfc

    g = 10.0 ** (snr_db / 10.0)
    q = 0.5 * erfc(np.sqrt(g) / np.sqrt(2.0))
    return float(2.0 * q - q * q)
