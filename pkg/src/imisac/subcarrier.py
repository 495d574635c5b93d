"""OFDM subcarrier index modulation with null-subcarrier detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import RngStream, rayleigh_gains
from .codebook import (CodebookError, SelectionPattern, bits_for_selection, bits_to_int,
                       int_to_bits, rank_combination, unrank_combination)
from .constellation import bits_per_symbol, psk_demodulate, psk_modulate
from .waveforms import SampledWaveform


@dataclass(frozen=True)
class OfdmImConfig:
    K: int
    K_s: int
    B: int = 1
    M: int = 2
    T0: float = 1e-4
    oversample: int = 8

    def __post_init__(self):
        if not 1 <= self.K_s <= self.K:
            raise CodebookError(f"need 1 <= K_s <= K, got K_s={self.K_s}, K={self.K}")
        if self.B < 1:
            raise CodebookError("need at least one OFDM symbol")
        bits_per_symbol(self.M)

    @property
    def index_bits(self) -> int:
        return bits_for_selection(self.K_s, self.K)

    @property
    def symbol_bits(self) -> int:
        return self.K_s * bits_per_symbol(self.M)

    @property
    def bits_per_ofdm_symbol(self) -> int:
        return self.index_bits + self.symbol_bits

    @property
    def n_bits(self) -> int:
        return self.B * self.bits_per_ofdm_symbol

    @property
    def frequencies(self) -> np.ndarray:
        """Subcarrier offsets ``k / T0``."""
        return np.arange(self.K) / self.T0

    @property
    def samples_per_symbol(self) -> int:
        return max(self.oversample * self.K, 1)

    @property
    def fs(self) -> float:
        return self.samples_per_symbol / self.T0


@dataclass
class OfdmGrid:
    values: np.ndarray
    active: list[SelectionPattern]


def tx_subcarrier_im(bits, cfg: OfdmImConfig) -> tuple[OfdmGrid, SampledWaveform]:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != cfg.n_bits:
        raise CodebookError(f"expected {cfg.n_bits} bits, got {bits.size}")
    values = np.zeros((cfg.B, cfg.K), dtype=complex)
    active = []
    per = cfg.bits_per_ofdm_symbol
    for b in range(cfg.B):
        chunk = bits[b * per:(b + 1) * per]
        pattern = unrank_combination(bits_to_int(chunk[:cfg.index_bits]), cfg.K_s, cfg.K)
        if cfg.M > 1:
            values[b, list(pattern.indices)] = psk_modulate(chunk[cfg.index_bits:], cfg.M)
        else:
            values[b, list(pattern.indices)] = 1.0
        active.append(pattern)
    return OfdmGrid(values, active), ofdm_waveform(values, cfg)


def ofdm_waveform(values: np.ndarray, cfg: OfdmImConfig) -> SampledWaveform:
    """Sum of tones ``alpha_bk exp(j 2 pi f_k t)`` gated by one rectangle per symbol."""
    L = cfg.samples_per_symbol
    t = np.arange(cfg.B * L) / cfg.fs
    tones = np.exp(2j * np.pi * np.outer(cfg.frequencies, t))
    symbol_of_sample = np.arange(t.size) // L
    x = np.einsum("sk,ks->s", values[symbol_of_sample], tones)
    return SampledWaveform(x, cfg.fs)


def ofdm_demodulate(x: SampledWaveform, cfg: OfdmImConfig) -> np.ndarray:
    """Project each symbol interval onto the subcarrier tones, shape ``(B, K)``."""
    L = cfg.samples_per_symbol
    blocks = np.asarray(x.samples).reshape(cfg.B, L)
    m = np.arange(L)
    # k / T0 * m / fs = k m / L, and the symbol start adds an integer number of cycles
    basis = np.exp(-2j * np.pi * np.outer(m, np.arange(cfg.K)) / L)
    return blocks @ basis / L


def detect_nulls(grid: np.ndarray, K_s: int) -> list[tuple[int, ...]]:
    """The ``K - K_s`` weakest subcarriers per symbol; ties resolve to lower indices."""
    grid = np.atleast_2d(grid)
    n_null = grid.shape[1] - K_s
    order = np.argsort(np.abs(grid) ** 2, axis=1, kind="stable")
    return [tuple(sorted(int(k) for k in row[:n_null])) for row in order]


def rx_null_detect(grid, cfg: OfdmImConfig, gains=None) -> np.ndarray:
    """Recover bits from an observed frequency grid.

    ``gains`` are the known per-subcarrier channel coefficients used to
    equalise the active values before the PSK decision. When the detected
    active set is not a codeword, the codeword with the largest active-set
    energy is chosen instead.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if grid.shape != (cfg.B, cfg.K):
        raise CodebookError(f"grid shape {grid.shape} does not match ({cfg.B}, {cfg.K})")
    if gains is not None:
        gains = np.broadcast_to(np.asarray(gains, dtype=complex), grid.shape)
    n_codewords = 1 << cfg.index_bits
    out = []
    for b, nulls in enumerate(detect_nulls(grid, cfg.K_s)):
        active = tuple(k for k in range(cfg.K) if k not in nulls)
        r = rank_combination(SelectionPattern(active, cfg.K), full=True)
        if r >= n_codewords:
            power = np.abs(grid[b]) ** 2
            scores = [power[list(unrank_combination(i, cfg.K_s, cfg.K).indices)].sum()
                      for i in range(n_codewords)]
            r = int(np.argmax(scores))
            active = unrank_combination(r, cfg.K_s, cfg.K).indices
        out.append(int_to_bits(r, cfg.index_bits))
        if cfg.M > 1:
            vals = grid[b, list(active)]
            if gains is not None:
                vals = vals / gains[b, list(active)]
            out.append(psk_demodulate(vals, cfg.M))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.uint8)


class SubcarrierLink:
    """Frequency-grid link: per-subcarrier flat gains (unit or Rayleigh) plus AWGN."""

    name = "subcarrier"

    def __init__(self, cfg: OfdmImConfig, fading: bool = False):
        self.cfg = cfg
        self.fading = fading
        self.n_bits = cfg.n_bits
        per = np.zeros(cfg.bits_per_ofdm_symbol, dtype=bool)
        per[:cfg.index_bits] = True
        self.index_mask = np.tile(per, cfg.B)

    def transmit(self, bits, rng: RngStream):
        grid, x = tx_subcarrier_im(bits, self.cfg)
        observed = ofdm_demodulate(x, self.cfg)
        gains = rayleigh_gains(self.cfg.B * self.cfg.K, rng).reshape(grid.values.shape) \
            if self.fading else np.ones_like(grid.values)
        return gains * observed, gains

    def decode(self, obs, gains) -> np.ndarray:
        return rx_null_detect(obs, self.cfg, gains)
