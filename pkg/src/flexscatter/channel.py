"""BPSK over AWGN with per-symbol excitation erasures.

SNR is Es/N0 in dB per coded symbol.  Channel output is delivered directly as
LLRs (2y / sigma^2); a symbol transmitted while the excitation source is idle
reaches the receiver as pure noise, which we model as an erased LLR of exactly
zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")

    @property
    def noise_var(self) -> float:
        """sigma^2 = 1 / (2 Es/N0) with unit symbol energy."""
        return 1.0 / (2.0 * 10.0 ** (self.snr_db / 10.0))


def modulate_bpsk(bits) -> np.ndarray:
    """Bit 0 -> +1.0, bit 1 -> -1.0."""
    bits = np.asarray(bits, dtype=np.uint8)
    return 1.0 - 2.0 * bits.astype(np.float64)


class Channel:
    """AWGN channel with a private random stream; one instance per trial."""

    def __init__(self, cfg: ChannelConfig, rng: np.random.Generator | None = None):
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.Generator(np.random.PCG64(cfg.seed))

    def transmit(self, symbols: np.ndarray) -> np.ndarray:
        symbols = np.asarray(symbols, dtype=np.float64)
        var = self.cfg.noise_var
        y = symbols + self.rng.normal(0.0, math.sqrt(var), size=symbols.size)
        return 2.0 * y / var


def transmit_awgn(symbols: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """One-shot transmission: y = x + N(0, sigma^2), returned as LLRs 2y/sigma^2."""
    return Channel(cfg).transmit(symbols)


def apply_excitation_mask(llrs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero out the LLRs of symbols sent while the excitation was absent."""
    llrs = np.asarray(llrs, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.uint8)
    if llrs.size != mask.size:
        raise ValueError(f"mask length {mask.size} != llr length {llrs.size}")
    return llrs * mask


def exact_ratio_mask(n_symbols: int, interval_ratio: float, rng: np.random.Generator) -> np.ndarray:
    """Mask with exactly ceil(ratio * n) erased positions, placed uniformly."""
    if not 0.0 <= interval_ratio <= 1.0:
        raise ValueError("interval_ratio must lie in [0, 1]")
    mask = np.ones(n_symbols, dtype=np.uint8)
    n_erased = math.ceil(interval_ratio * n_symbols)
    if n_erased:
        mask[rng.choice(n_symbols, size=n_erased, replace=False)] = 0
    return mask


def bernoulli_mask(n_symbols: int, interval_ratio: float, rng: np.random.Generator) -> np.ndarray:
    """Mask with independent per-symbol idle probability interval_ratio."""
    if not 0.0 <= interval_ratio <= 1.0:
        raise ValueError("interval_ratio must lie in [0, 1]")
    return (rng.random(n_symbols) >= interval_ratio).astype(np.uint8)
