"""Side-lobe scrambling defenses.

Two families: antenna-subset randomization (disable or phase-flip a random
k-subset of elements, switched per symbol or per packet, drawn from a seeded
codebook of M masks) and extra RF chains radiating artificial noise through
precoders that are zero-forced toward the victim receiver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arraymodel import Direction, PhasedArray, steer
from .baseband import PacketModel, channel_gains
from .errors import ConfigurationError

DEFAULT_CODEBOOK_SIZE = 256
DEFAULT_NOISE_POWER_REL_DB = 0.0


@dataclass(frozen=True)
class DefenseConfig:
    kind: str = "none"  # none | antenna | rfchain
    mode: str = "flip"  # disable | flip (antenna kind)
    subset_size_k: int = 0
    codebook_size_m: int = DEFAULT_CODEBOOK_SIZE
    switching: str = "per_symbol"  # per_symbol | per_packet
    noise_chains: int = 1
    noise_power_rel_db: float = DEFAULT_NOISE_POWER_REL_DB
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "antenna", "rfchain"):
            raise ConfigurationError(f"unknown defense kind {self.kind!r}")
        if self.kind == "antenna":
            if self.mode not in ("disable", "flip"):
                raise ConfigurationError(f"unknown antenna mode {self.mode!r}")
            if self.switching not in ("per_symbol", "per_packet"):
                raise ConfigurationError(f"unknown switching {self.switching!r}")
            if self.subset_size_k < 0:
                raise ConfigurationError("subset_size_k must be >= 0")
            if self.codebook_size_m < 1:
                raise ConfigurationError("codebook_size_m must be >= 1")
        if self.kind == "rfchain" and self.noise_chains < 1:
            raise ConfigurationError("noise_chains must be >= 1")

    def label(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "antenna":
            sw = "symbol" if self.switching == "per_symbol" else "packet"
            return (f"antenna:{self.mode}:k={self.subset_size_k}"
                    f":m={self.codebook_size_m}:{sw}")
        return f"rfchain:chains={self.noise_chains}:power={self.noise_power_rel_db:g}"


def parse_defense(text: str, n_elements: int | None = None) -> DefenseConfig:
    """Parse CLI defense strings like ``antenna:flip:k=32:m=256:symbol``.

    ``k=N/4`` style fractions are resolved against ``n_elements``.
    """
    parts = text.strip().split(":")
    head = parts[0].lower()
    if head == "none":
        return DefenseConfig(kind="none")
    if head == "antenna":
        if len(parts) < 2 or parts[1] not in ("disable", "flip"):
            raise ConfigurationError(
                f"antenna defense needs a mode (disable|flip): {text!r}")
        kw = _keyvals(parts[2:], text)
        switching = {"symbol": "per_symbol", "packet": "per_packet",
                     "per_symbol": "per_symbol", "per_packet": "per_packet"}.get(
                         kw.pop("_bare", "symbol"))
        if switching is None:
            raise ConfigurationError(f"bad switching token in {text!r}")
        k = kw.pop("k", None)
        m = kw.pop("m", None)
        seed = kw.pop("seed", 0)
        if kw:
            raise ConfigurationError(f"unknown keys {sorted(kw)} in {text!r}")
        if k is None:
            if n_elements is None:
                raise ConfigurationError(f"defense {text!r} needs k=")
            k = n_elements // 4
        if m is None:
            m = DEFAULT_CODEBOOK_SIZE
            if n_elements is not None:
                m = min(m, math.comb(n_elements, int(k)))
        return DefenseConfig(kind="antenna", mode=parts[1], subset_size_k=int(k),
                             codebook_size_m=int(m), switching=switching,
                             seed=int(seed))
    if head == "rfchain":
        kw = _keyvals(parts[1:], text)
        kw.pop("_bare", None)
        chains = kw.pop("chains", 1)
        power = kw.pop("power", DEFAULT_NOISE_POWER_REL_DB)
        seed = kw.pop("seed", 0)
        if kw:
            raise ConfigurationError(f"unknown keys {sorted(kw)} in {text!r}")
        return DefenseConfig(kind="rfchain", noise_chains=int(chains),
                             noise_power_rel_db=float(power), seed=int(seed))
    raise ConfigurationError(f"unknown defense {text!r}")


def _keyvals(parts, text):
    out = {}
    for p in parts:
        if not p:
            continue
        if "=" in p:
            key, val = p.split("=", 1)
            out[key.lower()] = float(val) if "." in val else int(val)
        else:
            if "_bare" in out:
                raise ConfigurationError(f"unexpected token {p!r} in {text!r}")
            out["_bare"] = p.lower()
    return out


def build_codebook(array: PhasedArray, cfg: DefenseConfig) -> np.ndarray:
    """M distinct k-subsets of elements, drawn deterministically from the seed.

    Returned as a boolean matrix (M, N); True marks a selected element.
    """
    if cfg.kind != "antenna":
        raise ConfigurationError("codebooks only apply to antenna defenses")
    n, k, m = array.size, cfg.subset_size_k, cfg.codebook_size_m
    if k > n:
        raise ConfigurationError(f"subset size {k} exceeds element count {n}")
    if m > math.comb(n, k):
        raise ConfigurationError(
            f"cannot draw {m} distinct {k}-subsets of {n} elements "
            f"(only {math.comb(n, k)} exist)")
    rng = np.random.default_rng(cfg.seed)
    seen = set()
    masks = np.zeros((m, n), dtype=bool)
    idx = 0
    while idx < m:
        subset = tuple(sorted(rng.choice(n, size=k, replace=False))) if k else ()
        if subset in seen:
            continue
        seen.add(subset)
        masks[idx, list(subset)] = True
        idx += 1
    masks.flags.writeable = False
    return masks


def apply_mask(weights: np.ndarray, mask: np.ndarray, mode: str) -> np.ndarray:
    out = np.asarray(weights, dtype=complex).copy()
    if mode == "disable":
        out[mask] = 0.0
    elif mode == "flip":
        out[mask] = -out[mask]
    else:
        raise ConfigurationError(f"unknown antenna mode {mode!r}")
    return out


class WeightSchedule:
    """Per-symbol transmit weights as (base weights, codebook, draw indices).

    Materializing one weight vector per symbol would be wasteful; traces only
    need the per-symbol channel toward each receiver, which collapses to a
    lookup of per-mask channels.
    """

    def __init__(self, base_weights: np.ndarray, codebook: np.ndarray | None,
                 mode: str, indices: np.ndarray):
        self.base_weights = np.asarray(base_weights, dtype=complex)
        self.codebook = codebook
        self.mode = mode
        self.indices = np.asarray(indices, dtype=int)

    @property
    def symbol_count(self) -> int:
        return self.indices.size

    def weights_at(self, t: int) -> np.ndarray:
        """Weight vector transmitted for symbol t (for inspection/tests)."""
        if self.codebook is None:
            return self.base_weights.copy()
        return apply_mask(self.base_weights, self.codebook[self.indices[t]], self.mode)

    def mask_channel_table(self, array: PhasedArray, directions) -> np.ndarray:
        """Per-mask normalized taps toward each direction, shape (M, devices)."""
        if self.codebook is None:
            return channel_gains(array, self.base_weights, directions)[None, :]
        rows = [channel_gains(array, apply_mask(self.base_weights, mask, self.mode),
                              directions) for mask in self.codebook]
        return np.array(rows)

    def channels(self, array: PhasedArray, directions) -> np.ndarray:
        """Per-symbol taps toward each direction, shape (symbols, devices)."""
        table = self.mask_channel_table(array, directions)
        if self.codebook is None:
            return np.repeat(table, self.symbol_count, axis=0)
        return table[self.indices]


def weight_schedule(steered: np.ndarray, codebook: np.ndarray | None,
                    cfg: DefenseConfig, symbol_count: int,
                    packet_model: PacketModel = PacketModel()) -> WeightSchedule:
    """Draw the per-symbol (or per-packet) mask sequence for a transmission."""
    if cfg.kind != "antenna" or codebook is None:
        return WeightSchedule(steered, None, "none", np.zeros(symbol_count, dtype=int))
    rng = np.random.default_rng(cfg.seed + 1)  # decouple draws from codebook build
    m = codebook.shape[0]
    if cfg.switching == "per_symbol":
        indices = rng.integers(0, m, symbol_count)
    else:
        packets = -(-symbol_count // packet_model.symbols_per_packet)
        per_packet = rng.integers(0, m, packets)
        indices = np.repeat(per_packet, packet_model.symbols_per_packet)[:symbol_count]
    return WeightSchedule(steered, codebook, cfg.mode, indices)


def rf_noise_precoders(array: PhasedArray, rx_dir: Direction,
                       cfg: DefenseConfig) -> np.ndarray:
    """Noise-chain precoders zero-forced at the victim, shape (chains, N).

    Each precoder is orthogonal to the victim's steering vector (the victim
    hears none of the artificial noise) and to the other chains. They are
    scaled so the total radiated noise power is ``noise_power_rel_db``
    relative to the data signal's radiated power.
    """
    if cfg.kind != "rfchain":
        raise ConfigurationError("rf_noise_precoders requires a rfchain defense")
    n = array.size
    if cfg.noise_chains >= n:
        raise ConfigurationError(
            f"noise_chains must be < element count ({cfg.noise_chains} >= {n})")
    a = np.conj(steer(array, rx_dir))  # array response toward the victim
    rng = np.random.default_rng(cfg.seed)
    basis: list[np.ndarray] = []
    while len(basis) < cfg.noise_chains:
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v -= a * (np.conj(a) @ v) / (np.conj(a) @ a)
        for q in basis:
            v -= q * (np.conj(q) @ v)
        norm = np.linalg.norm(v)
        if norm < 1e-9:  # random vector landed in the span already used
            continue
        basis.append(v / norm)
    # data power ~ ||w||^2 = N for unit steering weights; split across chains
    scale = np.sqrt(n * 10.0 ** (cfg.noise_power_rel_db / 10.0) / cfg.noise_chains)
    return np.array(basis) * scale


def mainlobe_loss_db(cfg: DefenseConfig, n_elements: int) -> float:
    """Worst-case steering-direction amplitude loss of the antenna defense."""
    k = cfg.subset_size_k
    if cfg.kind != "antenna" or k == 0:
        return 0.0
    frac = 1.0 - (2.0 if cfg.mode == "flip" else 1.0) * k / n_elements
    if frac <= 0:
        return -np.inf
    return 20.0 * np.log10(frac)
