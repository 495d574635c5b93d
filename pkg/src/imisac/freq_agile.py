"""Frequency-index modulation over a full array (distinct or reused slots) and over grouped subarrays.

Slot ``k`` is the baseband tone ``k / T``; slots are therefore orthogonal
over one pulse of ``L`` samples. Element ``n`` is weighted by
``w_n = exp(j 2 pi n f_n (d / c0) sin(theta_r))`` with ``f_n`` the absolute
carrier-plus-slot frequency.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import RngStream
from .codebook import (CodebookError, OrderedAssignment, SelectionPattern, assignment_count,
                       binomial, bits_to_int, floor_log2, int_to_bits, partition_count,
                       rank_assignment, rank_combination, rank_partition, unrank_assignment,
                       unrank_combination, unrank_partition)
from .waveforms import SPEED_OF_LIGHT, ArrayGeometry


@dataclass(frozen=True)
class FreqAgileConfig:
    """``G=None`` selects the ungrouped scheme; ``reuse`` lets elements share a slot there."""

    N: int
    K: int
    G: int | None = None
    reuse: bool = False
    T: float = 1e-6
    L: int = 32
    f_c: float = 28e9

    def __post_init__(self):
        if self.N < 1 or self.K < 1:
            raise CodebookError("need N >= 1 and K >= 1")
        if self.G is None:
            if not self.reuse and self.N > self.K:
                raise CodebookError(f"distinct-frequency mode needs N <= K, got N={self.N}, K={self.K}")
        else:
            if self.G < 1 or self.N % self.G:
                raise CodebookError(f"G={self.G} must divide N={self.N}")
            if self.G > self.K:
                raise CodebookError(f"need G <= K, got G={self.G}, K={self.K}")
        if self.K > self.L:
            raise CodebookError(f"{self.K} orthogonal slots need L >= K samples")

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N, self.f_c)

    @property
    def pattern_count(self) -> int:
        if self.G is not None:
            return binomial(self.G, self.K) * partition_count(self.N, self.G)
        if self.reuse:
            return self.K**self.N
        return assignment_count(self.N, self.K)

    @property
    def n_bits(self) -> int:
        return floor_log2(self.pattern_count)

    @property
    def fs(self) -> float:
        return self.L / self.T

    @cached_property
    def tones(self) -> np.ndarray:
        """Unit-modulus slot tones, shape ``(K, L)``."""
        m = np.arange(self.L)
        return np.exp(2j * np.pi * np.outer(np.arange(self.K), m) / self.L)


@dataclass
class FrequencyAssignment:
    """Slot per element plus, in grouped mode, the group label per element."""

    slots: tuple[int, ...]
    groups: tuple[int, ...] | None = None

    def group_selection(self, g: int, N: int) -> np.ndarray:
        """Diagonal 0/1 matrix marking members of group ``g``."""
        if self.groups is None:
            raise ValueError("assignment is not grouped")
        return np.diag([1.0 if lab == g else 0.0 for lab in self.groups][:N])


def array_weights(slots, cfg: FreqAgileConfig, theta: float) -> np.ndarray:
    f_abs = cfg.f_c + np.asarray(slots, dtype=float) / cfg.T
    n = np.arange(cfg.N)
    return np.exp(2j * np.pi * n * f_abs * (cfg.geometry.d / SPEED_OF_LIGHT) * np.sin(theta))


def _emit(slots, cfg: FreqAgileConfig, theta: float) -> np.ndarray:
    return array_weights(slots, cfg, theta)[:, None] * cfg.tones[list(slots)]


def assignment_from_rank(r: int, cfg: FreqAgileConfig) -> FrequencyAssignment:
    if cfg.G is not None:
        parts = partition_count(cfg.N, cfg.G)
        c, q = divmod(r, parts)
        chosen = unrank_combination(c, cfg.G, cfg.K, full=True).indices
        labels = unrank_partition(q, cfg.N, cfg.G)
        return FrequencyAssignment(tuple(chosen[g] for g in labels), labels)
    if cfg.reuse:
        digits = []
        for _ in range(cfg.N):
            r, d = divmod(r, cfg.K)
            digits.append(d)
        return FrequencyAssignment(tuple(reversed(digits)))
    return FrequencyAssignment(unrank_assignment(r, cfg.N, cfg.K, full=True).items())


def rank_of_assignment(a: FrequencyAssignment, cfg: FreqAgileConfig) -> int:
    """Full-space rank; raises if the slots do not form a valid pattern."""
    if cfg.G is not None:
        if a.groups is None:
            raise CodebookError("grouped mode needs group labels")
        chosen = sorted({a.slots[n] for n in range(cfg.N)})
        if len(chosen) != cfg.G:
            raise CodebookError(f"expected {cfg.G} distinct slots, got {chosen}")
        c = rank_combination(SelectionPattern(tuple(chosen), cfg.K), full=True)
        labels = [chosen.index(s) for s in a.slots]
        return c * partition_count(cfg.N, cfg.G) + rank_partition(labels, cfg.G)
    if cfg.reuse:
        r = 0
        for s in a.slots:
            r = r * cfg.K + int(s)
        return r
    return rank_assignment(OrderedAssignment.from_items(a.slots, cfg.K), full=True)


def _decode_bits(bits, cfg: FreqAgileConfig) -> FrequencyAssignment:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != cfg.n_bits:
        raise CodebookError(f"expected {cfg.n_bits} bits, got {bits.size}")
    return assignment_from_rank(bits_to_int(bits), cfg)


def tx_majorcom(bits, cfg: FreqAgileConfig, theta: float) -> tuple[FrequencyAssignment, np.ndarray]:
    """Full-array transmitter; returns the assignment and per-element samples ``(N, L)``."""
    if cfg.G is not None:
        raise CodebookError("tx_majorcom needs an ungrouped config (G=None)")
    a = _decode_bits(bits, cfg)
    return a, _emit(a.slots, cfg, theta)


def tx_grouped(bits, cfg: FreqAgileConfig, theta: float) -> tuple[FrequencyAssignment, np.ndarray]:
    """Grouped-subarray transmitter: ``sum_g Qg w_g tone_g``."""
    if cfg.G is None:
        raise CodebookError("tx_grouped needs a grouped config")
    a = _decode_bits(bits, cfg)
    chosen = sorted(set(a.slots))
    x = np.zeros((cfg.N, cfg.L), dtype=complex)
    for g, slot in enumerate(chosen):
        Qg = a.group_selection(g, cfg.N)
        w = array_weights([slot] * cfg.N, cfg, theta)
        x += Qg @ (w[:, None] * np.broadcast_to(cfg.tones[slot], (cfg.N, cfg.L)))
    return a, x


def slot_correlations(y, tones: np.ndarray) -> np.ndarray:
    """Correlation of each stream against each slot tone, shape ``(streams, K)``."""
    return np.atleast_2d(y) @ tones.conj().T / tones.shape[1]


def decode_assignment(scores: np.ndarray, valid, rank_of, n_codewords: int, candidates) -> int:
    """Pick the per-stream argmax; fall back to the best-scoring codeword if that is invalid.

    ``scores[n, k]`` rates slot ``k`` on stream ``n``; ``candidates(i)`` gives
    the slot tuple of codeword ``i``.
    """
    guess = tuple(int(k) for k in np.argmax(scores, axis=1))
    if valid(guess):
        r = rank_of(guess)
        if r < n_codewords:
            return r
    n = np.arange(scores.shape[0])
    best, best_score = 0, -np.inf
    for i in range(n_codewords):
        s = scores[n, list(candidates(i))].sum()
        if s > best_score:
            best, best_score = i, s
    return best


def rx_freq_agile(y, cfg: FreqAgileConfig) -> np.ndarray:
    """Per-stream tone detection; ``y`` is ``(N, L)``, one row per transmit element."""
    y = np.atleast_2d(np.asarray(y, dtype=complex))
    if y.shape != (cfg.N, cfg.L):
        raise CodebookError(f"observation shape {y.shape} does not match ({cfg.N}, {cfg.L})")
    scores = np.abs(slot_correlations(y, cfg.tones)) ** 2
    n_codewords = 1 << cfg.n_bits

    def valid(slots):
        if cfg.G is not None:
            return len(set(slots)) == cfg.G and all(
                slots.count(s) == cfg.N // cfg.G for s in set(slots))
        return cfg.reuse or len(set(slots)) == len(slots)

    def rank_of(slots):
        if cfg.G is not None:
            chosen = sorted(set(slots))
            return rank_of_assignment(FrequencyAssignment(slots, tuple(chosen.index(s) for s in slots)), cfg)
        return rank_of_assignment(FrequencyAssignment(slots), cfg)

    r = decode_assignment(scores, valid, rank_of, n_codewords,
                          lambda i: assignment_from_rank(i, cfg).slots)
    return int_to_bits(r, cfg.n_bits)


class FreqAgileLink:
    """Each element's stream observed separately through a known flat gain (unit here)."""

    def __init__(self, cfg: FreqAgileConfig, theta: float = np.deg2rad(30.0)):
        self.cfg = cfg
        self.theta = theta
        self.name = "majorcom" if cfg.G is None else "grouped"
        self.n_bits = cfg.n_bits
        self.index_mask = np.ones(cfg.n_bits, dtype=bool)

    def transmit(self, bits, rng: RngStream):
        tx = tx_majorcom if self.cfg.G is None else tx_grouped
        _, x = tx(bits, self.cfg, self.theta)
        return x, None

    def decode(self, obs, side) -> np.ndarray:
        return rx_freq_agile(obs, self.cfg)
