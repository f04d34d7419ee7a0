"""Attacker strategies and the defense-vs-attack evaluation harness.

Three strategies: plain single-device eavesdropping, multi-device
derandomization of antenna-subset defenses (joint maximum likelihood over
mask and symbol), and two-receiver cancellation of RF-chain artificial noise
(one receiver parked in a data-pattern gap hears noise only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .arraymodel import (Direction, PhasedArray, array_factor,
                         array_factor_many, gain_db_many, steer)
from .baseband import (PILOT_LEN, QPSK, PacketModel, SymbolTrace, decide,
                       modulate, pilot_estimate, psr_from_ser, transmit)
from .defense import (DefenseConfig, WeightSchedule, build_codebook,
                      rf_noise_precoders, weight_schedule)
from .errors import ConfigurationError, EstimationError

NULL_GAIN_DB = -60.0  # "gap between side lobes" placement threshold
NULL_LEAK_WARN_DB = -40.0
_ML_BATCH = 4096


@dataclass(frozen=True)
class AttackConfig:
    strategy: str = "single"  # single | derandomize | noise_cancel
    devices: int = 1
    channel_knowledge: str = "known"  # known | estimated
    snr_db: float = 20.0
    seed: int = 0
    device_positions: tuple | None = None  # optional world positions (meters)

    def __post_init__(self):
        if self.strategy not in ("single", "derandomize", "noise_cancel"):
            raise ConfigurationError(f"unknown attack strategy {self.strategy!r}")
        if self.channel_knowledge not in ("known", "estimated"):
            raise ConfigurationError(
                f"unknown channel_knowledge {self.channel_knowledge!r}")
        if self.strategy == "derandomize" and self.devices < 2:
            raise ConfigurationError("derandomize requires >= 2 devices")
        if self.strategy == "noise_cancel" and self.devices != 2:
            raise ConfigurationError("noise_cancel requires exactly 2 devices")

    def label(self) -> str:
        if self.strategy == "single":
            return "single"
        if self.strategy == "derandomize":
            return f"derand:devices={self.devices}"
        return "cancel"


def parse_attack(text: str) -> AttackConfig:
    """Parse CLI attack strings: ``single``, ``derand:devices=4``, ``cancel``."""
    parts = text.strip().lower().split(":")
    head = parts[0]
    kw = {}
    for p in parts[1:]:
        if "=" not in p:
            raise ConfigurationError(f"bad attack token {p!r} in {text!r}")
        key, val = p.split("=", 1)
        kw[key] = val
    if head == "single":
        return AttackConfig(strategy="single", devices=1,
                            snr_db=float(kw.pop("snr", 20.0)), seed=int(kw.pop("seed", 0)))
    if head in ("derand", "derandomize"):
        return AttackConfig(strategy="derandomize", devices=int(kw.pop("devices", 4)),
                            channel_knowledge=kw.pop("channel", "known"),
                            snr_db=float(kw.pop("snr", 20.0)), seed=int(kw.pop("seed", 0)))
    if head in ("cancel", "noise_cancel"):
        return AttackConfig(strategy="noise_cancel", devices=2,
                            snr_db=float(kw.pop("snr", 20.0)), seed=int(kw.pop("seed", 0)))
    raise ConfigurationError(f"unknown attack {text!r}")


# ---------------------------------------------------------------------------
# Single device

def attack_single(trace: SymbolTrace, packet_model: PacketModel | None = None,
                  pilot_len: int = PILOT_LEN) -> float:
    """Static-equalizer eavesdropping SER.

    Estimates one channel tap by least squares over the leading pilots and
    slices the remainder. With ``packet_model`` the estimate is refreshed from
    each packet's own pilot prefix (the right attacker move against
    packet-level switching, where the channel holds within a packet).
    """
    if trace.device_count != 1:
        raise ConfigurationError("attack_single expects a 1-device trace")
    if not np.any(trace.samples):
        raise EstimationError("all-zero trace")
    if packet_model is None:
        spans = [(0, trace.symbol_count)]
    else:
        step = packet_model.symbols_per_packet
        spans = [(t, min(t + step, trace.symbol_count))
                 for t in range(0, trace.symbol_count, step)]
    errors = 0
    counted = 0
    for lo, hi in spans:
        chunk = SymbolTrace(trace.samples[:, lo:hi], trace.truth[lo:hi],
                            trace.noise_sigma)
        h = pilot_estimate(chunk, pilot_len)
        data = chunk.samples[0, pilot_len:] / h[0]
        decisions = decide(data)
        errors += int(np.sum(decisions != chunk.truth[pilot_len:]))
        counted += decisions.size
    if counted == 0:
        raise EstimationError("trace shorter than the pilot prefix")
    return errors / counted


# ---------------------------------------------------------------------------
# Multi-device derandomization

@dataclass(frozen=True)
class DerandResult:
    decisions: np.ndarray
    mask_indices: np.ndarray
    ser: float
    mask_accuracy: float | None = None


def joint_ml_decode(trace: SymbolTrace, channel_table: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive per-symbol ML over (mask, symbol) pairs.

    ``channel_table`` is (M, devices): the predicted tap of each codebook mask
    at each device. Minimizes the noise-weighted squared residual summed over
    devices; exact, cost O(symbols * M * 4).
    """
    h = np.asarray(channel_table, dtype=complex)
    w = 1.0 / trace.noise_sigma ** 2
    # cost(t,m,q) = const(t) + sum_d w|h_md|^2 - 2 Re[(sum_d w y_td h_md*) c_q*]
    self_term = (np.abs(h) ** 2 @ w)  # (M,)
    masks = np.empty(trace.symbol_count, dtype=int)
    syms = np.empty(trace.symbol_count, dtype=int)
    yw = trace.samples.T * w[None, :]  # (T, D)
    hconj = np.conj(h).T  # (D, M)
    for lo in range(0, trace.symbol_count, _ML_BATCH):
        hi = min(lo + _ML_BATCH, trace.symbol_count)
        cross = yw[lo:hi] @ hconj  # (B, M)
        cost = self_term[None, :, None] - 2.0 * np.real(
            cross[:, :, None] * np.conj(QPSK)[None, None, :])  # (B, M, 4)
        flat = cost.reshape(hi - lo, -1).argmin(axis=1)
        masks[lo:hi] = flat // 4
        syms[lo:hi] = flat % 4
    return masks, syms


def _estimated_channel_table(trace: SymbolTrace, ratio_table: np.ndarray,
                             pilot_len: int, rounds: int = 3) -> np.ndarray:
    """Per-device complex base gains fitted on the pilots, times known ratios.

    The attacker can predict each mask's pattern ratio from the public array
    geometry but not the absolute channel; alternate between identifying the
    pilot masks and refitting the base gain.
    """
    pilot_len = min(pilot_len, trace.symbol_count)
    y = trace.samples[:, :pilot_len]
    s = modulate(trace.truth[:pilot_len])
    mean_ratio = ratio_table.mean(axis=0)  # (D,)
    g = (y @ np.conj(s)) / float(np.sum(np.abs(s) ** 2)) / mean_ratio
    w = 1.0 / trace.noise_sigma ** 2
    for _ in range(rounds):
        pred = g[None, :] * ratio_table  # (M, D)
        resid = np.abs(y.T[:, None, :] - pred[None, :, :] * s[:, None, None]) ** 2
        m_hat = (resid * w[None, None, :]).sum(axis=2).argmin(axis=1)
        r = ratio_table[m_hat]  # (T, D)
        denom = np.sum(np.abs(r) ** 2 * np.abs(s[:, None]) ** 2, axis=0)
        if np.any(denom == 0):
            raise EstimationError("degenerate pilot fit")
        g = np.sum(y.T * np.conj(r * s[:, None]), axis=0) / denom
    return g[None, :] * ratio_table


def attack_derandomize(trace: SymbolTrace, array: PhasedArray,
                       schedule: WeightSchedule, device_directions,
                       channel_knowledge: str = "known",
                       pilot_len: int = PILOT_LEN,
                       true_mask_indices: np.ndarray | None = None) -> DerandResult:
    """Undo per-symbol antenna randomization with synchronized devices.

    The attacker knows the codebook and array geometry; ``known`` channel
    knowledge also grants the absolute taps, ``estimated`` fits per-device
    complex gains on the pilot prefix. ``true_mask_indices`` is only used to
    score mask identification accuracy.
    """
    if trace.device_count < 2:
        raise ConfigurationError("derandomize requires >= 2 synchronized devices")
    table = schedule.mask_channel_table(array, list(device_directions))
    if channel_knowledge == "estimated":
        ref = table[0].copy()
        ref[ref == 0] = 1.0
        ratio = table / ref[None, :]
        table = _estimated_channel_table(trace, ratio, pilot_len)
    elif channel_knowledge != "known":
        raise ConfigurationError(f"unknown channel_knowledge {channel_knowledge!r}")
    masks, syms = joint_ml_decode(trace, table)
    ser = float(np.mean(syms != trace.truth))
    accuracy = None
    if true_mask_indices is not None:
        accuracy = float(np.mean(masks == np.asarray(true_mask_indices)))
    return DerandResult(decisions=syms, mask_indices=masks, ser=ser,
                        mask_accuracy=accuracy)


# ---------------------------------------------------------------------------
# Two-receiver noise cancellation

@dataclass(frozen=True)
class CancelResult:
    cleaned: np.ndarray
    alpha: complex
    ser: float
    warnings: tuple = field(default_factory=tuple)


def ls_cancel(y_ref: np.ndarray, y_mix: np.ndarray) -> tuple[complex, np.ndarray]:
    """Least-squares reference subtraction: alpha argmin ||mix - alpha*ref||."""
    denom = np.vdot(y_ref, y_ref)
    if denom == 0:
        raise EstimationError("reference trace is identically zero")
    alpha = complex(np.vdot(y_ref, y_mix) / denom)
    return alpha, y_mix - alpha * y_ref


def attack_noise_cancel(trace_null: SymbolTrace, trace_mix: SymbolTrace,
                        null_data_gain_db: float | None = None,
                        pilot_len: int = PILOT_LEN) -> CancelResult:
    """Subtract a noise-only reference from a mixed observation and decode.

    alpha minimizes ||mix - alpha * null|| over the whole trace; the cleaned
    samples are demodulated via a pilot-prefix channel estimate. If the
    reference position leaks data above the placement threshold the result
    carries a warning instead of failing.
    """
    if trace_null.device_count != 1 or trace_mix.device_count != 1:
        raise ConfigurationError("noise cancellation uses exactly two devices")
    if trace_null.symbol_count != trace_mix.symbol_count:
        raise ConfigurationError("reference and mix traces must be synchronized")
    warnings = []
    if null_data_gain_db is not None and null_data_gain_db > NULL_LEAK_WARN_DB:
        warnings.append(
            f"reference direction leaks data at {null_data_gain_db:.1f} dB "
            f"(> {NULL_LEAK_WARN_DB:.0f} dB); cancellation will remove signal too")
    alpha, cleaned = ls_cancel(trace_null.samples[0], trace_mix.samples[0])
    chunk = SymbolTrace(cleaned[None, :], trace_mix.truth, trace_mix.noise_sigma)
    h = pilot_estimate(chunk, pilot_len)
    decisions = decide(cleaned[pilot_len:] / h[0])
    ser = float(np.mean(decisions != trace_mix.truth[pilot_len:]))
    return CancelResult(cleaned=cleaned, alpha=alpha, ser=ser,
                        warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# Placement helpers

def side_lobe_directions(array: PhasedArray, weights: np.ndarray, count: int,
                         elevation: float = 0.0) -> list[Direction]:
    """First ``count`` side-lobe peak directions in the azimuth cut.

    Peaks beyond the main lobe, alternating +/- azimuth, nearest first; this
    is where a multi-device attacker parks its receivers.
    """
    az = np.linspace(1e-4, np.pi / 2, 20001)
    g = gain_db_many(array, weights, az, np.full_like(az, elevation))
    first_null = np.arcsin(min(1.0, 1.0 / (array.cols * array.spacing)))
    peaks = []
    for i in range(1, az.size - 1):
        if az[i] <= first_null:
            continue
        if g[i] > g[i - 1] and g[i] >= g[i + 1]:
            peaks.append(az[i])
    out = []
    for p in peaks:
        out.append(Direction(p, elevation))
        if len(out) >= count:
            break
        out.append(Direction(-p, elevation))
        if len(out) >= count:
            break
    if len(out) < count:
        raise ConfigurationError(
            f"pattern has only {len(out)} usable side-lobe peaks, need {count}")
    return out


def find_pattern_nulls(array: PhasedArray, weights: np.ndarray,
                       elevation: float = 0.0, max_gain_db: float = NULL_GAIN_DB,
                       limit: int = 8) -> list[Direction]:
    """Azimuth directions where the data pattern dips below ``max_gain_db``.

    Mirrors the attacker move of scanning for spots that carry noise only:
    coarse scan for candidate dips, then a bounded 1-D refinement of each.
    """
    az = np.linspace(1e-4, np.pi / 2 - 1e-4, 40001)
    g = gain_db_many(array, weights, az, np.full_like(az, elevation))

    def amp(a):
        return float(np.abs(array_factor_many(
            array, weights, np.array([a]), np.array([elevation])))[0])

    nulls = []
    i = 1
    while i < az.size - 1 and len(nulls) < limit:
        if g[i] < g[i - 1] and g[i] <= g[i + 1] and g[i] < max_gain_db + 20.0:
            res = minimize_scalar(amp, bounds=(az[i - 1], az[i + 1]), method="bounded",
                                  options={"xatol": 1e-12})
            refined = float(res.x)
            gg = gain_db_many(array, weights, np.array([refined]),
                              np.array([elevation]))[0]
            if gg <= max_gain_db:
                nulls.append(Direction(refined, elevation))
        i += 1
    if not nulls:
        raise ConfigurationError("no data-pattern gaps found below "
                                 f"{max_gain_db:.0f} dB")
    return nulls


def best_noise_reference(array: PhasedArray, weights: np.ndarray,
                         precoders: np.ndarray, nulls) -> Direction:
    """Among candidate data gaps, the one hearing the most artificial noise."""
    best, best_pow = None, -1.0
    for d in nulls:
        az, el = np.array([d.azimuth]), np.array([d.elevation])
        p = sum(float(np.abs(array_factor_many(array, q, az, el))[0] ** 2)
                for q in precoders)
        if p > best_pow:
            best, best_pow = d, p
    return best


# ---------------------------------------------------------------------------
# Defense x attack evaluation (shared by the CLI and the acceptance suite)

def evaluate_pair(array: PhasedArray, defense: DefenseConfig, attack: AttackConfig,
                  symbol_count: int = 20000, victim_snr_db: float = 20.0,
                  packet_model: PacketModel = PacketModel(), seed: int = 0) -> dict:
    """One (defense, attack) matrix cell: attacker SER/PSR plus victim SER.

    Attacker devices sit at the strongest side-lobe angles of the data
    pattern (the noise-cancel reference sits in a pattern gap instead);
    everything is deterministic in ``seed``.
    """
    if attack.strategy == "noise_cancel" and defense.kind != "rfchain":
        raise ConfigurationError(
            "noise_cancel only applies against an rfchain defense")
    if attack.strategy == "derandomize" and defense.kind == "rfchain":
        raise ConfigurationError(
            "derandomize targets antenna randomization, not rfchain noise")
    steered = steer(array, Direction(0.0, 0.0))
    codebook = build_codebook(array, defense) if defense.kind == "antenna" else None
    schedule = weight_schedule(steered, codebook, defense, symbol_count, packet_model)
    precoders = (rf_noise_precoders(array, Direction(0.0, 0.0), defense)
                 if defense.kind == "rfchain" else None)
    symbols = np.random.default_rng(seed).integers(0, 4, symbol_count)

    n_dirs = attack.devices if attack.strategy == "derandomize" else 1
    dirs = side_lobe_directions(array, steered, n_dirs)

    row = {"defense": defense.label(), "attack": attack.label(), "warnings": []}
    if attack.strategy == "single":
        trace = transmit(symbols, schedule, dirs, array, [attack.snr_db],
                         seed=seed + 1, noise_precoders=precoders)
        pm = packet_model if defense.switching == "per_packet" else None
        row["attacker_ser"] = attack_single(trace, packet_model=pm)
    elif attack.strategy == "derandomize":
        snrs = [attack.snr_db] * len(dirs)
        trace = transmit(symbols, schedule, dirs, array, snrs, seed=seed + 1,
                         noise_precoders=precoders)
        result = attack_derandomize(trace, array, schedule, dirs,
                                    channel_knowledge=attack.channel_knowledge,
                                    true_mask_indices=schedule.indices)
        row["attacker_ser"] = result.ser
        row["mask_accuracy"] = result.mask_accuracy
    else:  # noise_cancel
        nulls = find_pattern_nulls(array, steered)
        ref = best_noise_reference(array, steered, precoders, nulls)
        mix = dirs[0]
        h_mix = np.abs(_gain_amp(array, steered, mix))
        trace = transmit(symbols, schedule, [ref, mix], array,
                         [attack.snr_db, attack.snr_db], seed=seed + 1,
                         noise_precoders=precoders,
                         snr_ref_gains=[h_mix, h_mix])
        leak = gain_db_many(array, steered, np.array([ref.azimuth]),
                            np.array([ref.elevation]))[0]
        result = attack_noise_cancel(trace.device(0), trace.device(1),
                                     null_data_gain_db=float(leak))
        row["attacker_ser"] = result.ser
        row["warnings"] = list(result.warnings)

    victim_trace = transmit(symbols, schedule, [Direction(0.0, 0.0)], array,
                            [victim_snr_db], seed=seed + 2,
                            noise_precoders=precoders)
    row["victim_ser"] = attack_single(victim_trace, packet_model=packet_model)
    row["attacker_psr"] = psr_from_ser(row["attacker_ser"], packet_model)
    return row


def _gain_amp(array: PhasedArray, weights: np.ndarray, d: Direction) -> complex:
    return array_factor(array, weights, d) / array.size
