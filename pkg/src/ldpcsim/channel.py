"""BPSK over AWGN and a-priori LLR computation.

The decoder consumes log-likelihood ratios log(P(bit=0|y)/P(bit=1|y));
positive values favor bit 0.  For BPSK (0 -> +1, 1 -> -1) on a real AWGN
channel this reduces to 2*y/sigma^2.  LLRs are clamped to a finite range
so the min-sum arithmetic never sees infinities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelConfig:
    """Eb/N0-parameterized AWGN channel for a code of the given rate."""

    ebno_db: float
    rate: float
    seed: int = 0
    llr_clamp: float = 64.0

    def __post_init__(self):
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"rate must be in (0,1), got {self.rate}")

    @property
    def sigma2(self) -> float:
        """Noise variance per real dimension: 1 / (2 * rate * 10^(EbN0/10))."""
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebno_db / 10.0))


def modulate(bits: np.ndarray) -> np.ndarray:
    """BPSK map: bit 0 -> +1.0, bit 1 -> -1.0."""
    bits = np.asarray(bits)
    return 1.0 - 2.0 * bits.astype(np.float64)


def transmit(
    symbols: np.ndarray, cfg: ChannelConfig, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Add white Gaussian noise of variance cfg.sigma2.

    A fresh PCG64 generator is seeded from cfg.seed unless an existing
    stream is passed in (used by sweeps that draw many words).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return symbols + rng.normal(0.0, np.sqrt(cfg.sigma2), size=len(symbols))


def llr_init(y: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """A-priori LLRs for BPSK/AWGN: 2*y/sigma^2, clamped to +-llr_clamp."""
    llr = 2.0 * np.asarray(y, dtype=np.float64) / cfg.sigma2
    return np.clip(llr, -cfg.llr_clamp, cfg.llr_clamp)
