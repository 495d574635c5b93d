"""Chirp-based joint antenna/frequency/phase IM and frequency-hopping hybrid IM.

Chirp scheme, per pulse. Bit groups are consumed in a fixed order:

1. ``N_s log2 M`` phase bits, one PSK symbol per waveform;
2. frequency-pattern bits choosing ``N_s`` of ``K`` slots (waveform ``i``
   uses the ``i``-th smallest chosen slot);
3. antenna-pattern bits choosing ``N_s`` of ``N`` elements;
4. permutation bits: selected element ``j`` (ascending) emits waveform
   ``order[j]``.

Hopping scheme, per hop: ``N`` BPSK initial-phase bits (one per element)
then the rank of a distinct code-to-element assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import RngStream, rayleigh_gains
from .codebook import (MAX_LUT_BITS, CodebookError, OrderedAssignment, assignment_count,
                       bits_for_selection, bits_to_int, floor_log2, int_to_bits, rank_assignment,
                       unrank_assignment, unrank_combination, unrank_permutation)
from .constellation import bits_per_symbol, labels_to_bits, psk_modulate, psk_points
from .freq_agile import decode_assignment
from .waveforms import ArrayGeometry, FmcwSpec, WaveformError, fmcw_chirp, steering


@dataclass(frozen=True)
class FracConfig:
    """Times are in units of the PRI by default (``T = 1``).

    The slot step is ``1 / (kappa T)``; it must be a whole number of cycles
    per PRI so the slots stay orthogonal after dechirping, which with
    ``T = 1`` means ``1 / kappa`` is a positive integer.
    """

    N: int
    N_s: int
    K: int
    M: int = 2
    n_rx: int = 1
    L: int = 64
    T: float = 1.0
    kappa: float = 1.0
    chirp_duration: float | None = None

    def __post_init__(self):
        if not 1 <= self.N_s <= min(self.N, self.K):
            raise CodebookError(f"need 1 <= N_s <= min(N, K), got N_s={self.N_s}, N={self.N}, K={self.K}")
        bits_per_symbol(self.M)
        if self.n_rx < 1:
            raise CodebookError("need at least one receive antenna")
        q = self.fmcw.delta_f * self.T
        if abs(q - round(q)) > 1e-9 or round(q) < 1:
            raise WaveformError(f"slot step times PRI must be a positive integer, got {q}")
        if self.K * round(q) > self.L:
            raise WaveformError(f"{self.K} slots at step {round(q)}/T need L >= {self.K * round(q)} samples")
        if self.index_bits > MAX_LUT_BITS:
            raise CodebookError(f"{self.index_bits} index bits exceed the 2**{MAX_LUT_BITS} hypothesis guard")

    @property
    def fmcw(self) -> FmcwSpec:
        chirp = self.chirp_duration if self.chirp_duration is not None else self.T
        return FmcwSpec(self.kappa, chirp, self.T, self.K)

    @property
    def fs(self) -> float:
        return self.L / self.T

    @property
    def group_bits(self) -> dict:
        return {
            "phase": self.N_s * bits_per_symbol(self.M),
            "frequency": bits_for_selection(self.N_s, self.K),
            "antenna": bits_for_selection(self.N_s, self.N),
            "permutation": floor_log2(math.factorial(self.N_s)),
        }

    @property
    def index_bits(self) -> int:
        g = self.group_bits
        return g["frequency"] + g["antenna"] + g["permutation"]

    @property
    def n_bits(self) -> int:
        return self.group_bits["phase"] + self.index_bits

    @cached_property
    def chirp(self) -> np.ndarray:
        return fmcw_chirp(self.fmcw, self.fs).samples

    @cached_property
    def slot_waveforms(self) -> np.ndarray:
        """Chirp times slot tone, shape ``(K, L)``."""
        t = np.arange(self.L) / self.fs
        tones = np.exp(2j * np.pi * np.outer(np.arange(self.K) * self.fmcw.delta_f, t))
        return self.chirp[None, :] * tones

    @cached_property
    def hypotheses(self) -> tuple[np.ndarray, np.ndarray]:
        """Element and slot of every position ``j`` for each index hypothesis, in bit order."""
        g = self.group_bits
        ants, slots = [], []
        for fr in range(1 << g["frequency"]):
            F = unrank_combination(fr, self.N_s, self.K).indices
            for ar in range(1 << g["antenna"]):
                A = unrank_combination(ar, self.N_s, self.N).indices
                for pr in range(1 << g["permutation"]):
                    order = unrank_permutation(pr, self.N_s)
                    ants.append(A)
                    slots.append([F[o] for o in order])
        return np.array(ants, dtype=np.int64), np.array(slots, dtype=np.int64)


@dataclass
class FracSymbol:
    frequencies: tuple[int, ...]
    antennas: tuple[int, ...]
    order: tuple[int, ...]
    phases: np.ndarray

    def element_slots(self) -> dict:
        """Element -> (slot, PSK symbol)."""
        return {a: (self.frequencies[o], self.phases[o]) for a, o in zip(self.antennas, self.order)}


def split_frac_bits(bits, cfg: FracConfig) -> FracSymbol:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != cfg.n_bits:
        raise CodebookError(f"expected {cfg.n_bits} bits, got {bits.size}")
    g = cfg.group_bits
    pos = 0

    def take(n):
        nonlocal pos
        out = bits[pos:pos + n]
        pos += n
        return out

    phase_bits = take(g["phase"])
    phases = psk_modulate(phase_bits, cfg.M) if cfg.M > 1 else np.ones(cfg.N_s, dtype=complex)
    F = unrank_combination(bits_to_int(take(g["frequency"])), cfg.N_s, cfg.K).indices
    A = unrank_combination(bits_to_int(take(g["antenna"])), cfg.N_s, cfg.N).indices
    order = unrank_permutation(bits_to_int(take(g["permutation"])), cfg.N_s)
    return FracSymbol(F, A, order, phases)


def tx_frac(bits, cfg: FracConfig) -> tuple[FracSymbol, np.ndarray]:
    """Per-element samples ``(N, L)``: ``s(t) exp(j 2 pi k dF t) exp(j phi)`` on active elements."""
    sym = split_frac_bits(bits, cfg)
    x = np.zeros((cfg.N, cfg.L), dtype=complex)
    for a, (slot, s) in sym.element_slots().items():
        x[a] = s * cfg.slot_waveforms[slot]
    return sym, x


def frac_dictionary(cfg: FracConfig, h: np.ndarray) -> np.ndarray:
    """``U x NK`` dictionary, ``U = n_rx * L``; column ``n * K + k`` is element ``n`` on slot ``k``."""
    h = np.asarray(h, dtype=complex).reshape(cfg.n_rx, cfg.N)
    atoms = h.T[:, None, :, None] * cfg.slot_waveforms[None, :, None, :]
    return atoms.reshape(cfg.N * cfg.K, cfg.n_rx * cfg.L).T


def rx_frac(y, cfg: FracConfig, Phi: np.ndarray) -> np.ndarray:
    """Maximum-likelihood recovery of the block-sparse coefficient vector.

    Atoms on distinct slots are orthogonal, so ``||y - Phi xi||^2`` splits
    into one term per active atom. Each atom's best PSK symbol is found
    independently and the index hypotheses are searched exhaustively.
    """
    y = np.asarray(y, dtype=complex).ravel()
    Phi = np.asarray(Phi)
    if Phi.shape != (cfg.n_rx * cfg.L, cfg.N * cfg.K):
        raise CodebookError(f"dictionary shape {Phi.shape} does not match "
                            f"({cfg.n_rx * cfg.L}, {cfg.N * cfg.K})")
    if y.size != Phi.shape[0]:
        raise CodebookError(f"observation length {y.size} does not match dictionary rows {Phi.shape[0]}")
    corr = (Phi.conj().T @ y).reshape(cfg.N, cfg.K)
    energy = (np.abs(Phi) ** 2).sum(axis=0).reshape(cfg.N, cfg.K)
    pts = psk_points(cfg.M)
    gain = (pts.conj()[None, None, :] * corr[..., None]).real
    label = np.argmax(gain, axis=2)
    D = energy - 2 * np.take_along_axis(gain, label[..., None], axis=2)[..., 0]
    ants, slots = cfg.hypotheses
    cost = D[ants, slots].sum(axis=1)
    h = int(np.argmin(cost))
    g = cfg.group_bits
    n_perm = 1 << g["permutation"]
    n_ant = 1 << g["antenna"]
    fr, rest = divmod(h, n_ant * n_perm)
    ar, pr = divmod(rest, n_perm)
    F = unrank_combination(fr, cfg.N_s, cfg.K).indices
    out = []
    if cfg.M > 1:
        wave_labels = np.empty(cfg.N_s, dtype=np.int64)
        for a, slot in zip(ants[h], slots[h]):
            wave_labels[F.index(int(slot))] = label[a, slot]
        out.append(labels_to_bits(wave_labels, cfg.M))
    out += [int_to_bits(fr, g["frequency"]), int_to_bits(ar, g["antenna"]),
            int_to_bits(pr, g["permutation"])]
    return np.concatenate(out)


class FracLink:
    """User with ``n_rx`` antennas behind an i.i.d. Rayleigh channel known at the receiver."""

    name = "frac"

    def __init__(self, cfg: FracConfig):
        self.cfg = cfg
        self.n_bits = cfg.n_bits
        self.index_mask = np.zeros(cfg.n_bits, dtype=bool)
        self.index_mask[cfg.group_bits["phase"]:] = True

    def transmit(self, bits, rng: RngStream):
        _, x = tx_frac(bits, self.cfg)
        h = rayleigh_gains(self.cfg.n_rx * self.cfg.N, rng).reshape(self.cfg.n_rx, self.cfg.N)
        return (h @ x).ravel(), h

    def decode(self, obs, h) -> np.ndarray:
        return rx_frac(obs, self.cfg, frac_dictionary(self.cfg, h))


# -- frequency hopping -----------------------------------------------------

@dataclass(frozen=True)
class FhConfig:
    """Hop length ``T / H``; the unit frequency step defaults to one cycle per hop."""

    N: int
    K: int
    H: int
    theta_r: float = 0.3
    L_hop: int = 16
    T: float = 1e-6
    f_c: float = 28e9

    def __post_init__(self):
        if not 1 <= self.N <= self.K:
            raise CodebookError(f"need 1 <= N <= K, got N={self.N}, K={self.K}")
        if self.H < 1:
            raise CodebookError("need at least one hop")
        if self.K > self.L_hop:
            raise CodebookError(f"{self.K} orthogonal codes need L_hop >= K samples")

    @property
    def delta_t(self) -> float:
        return self.T / self.H

    @property
    def delta_f(self) -> float:
        return 1.0 / self.delta_t

    @property
    def fs(self) -> float:
        return self.L_hop / self.delta_t

    @property
    def code_bits(self) -> int:
        return floor_log2(assignment_count(self.N, self.K))

    @property
    def bits_per_hop(self) -> int:
        return self.N + self.code_bits

    @property
    def n_bits(self) -> int:
        return self.H * self.bits_per_hop

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N, self.f_c)

    @cached_property
    def zeta(self) -> np.ndarray:
        """Element phase ``n pi / N - angle(a_n(theta_r))`` (0-based ``n``)."""
        n = np.arange(self.N)
        return n * np.pi / self.N - np.angle(steering(self.geometry, self.theta_r))

    @cached_property
    def code_tones(self) -> np.ndarray:
        """Code tones over one hop, shape ``(K, L_hop)``; hop offsets add whole cycles."""
        m = np.arange(self.L_hop)
        return np.exp(2j * np.pi * np.outer(np.arange(self.K), m) / self.L_hop)


@dataclass
class FhHopSymbol:
    codes: tuple[int, ...]
    phase_bits: np.ndarray
    theta: np.ndarray

    @property
    def initial_phases(self) -> np.ndarray:
        return np.pi * self.phase_bits


def fh_hop_symbols(bits, cfg: FhConfig) -> list[FhHopSymbol]:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != cfg.n_bits:
        raise CodebookError(f"expected {cfg.n_bits} bits, got {bits.size}")
    hops = []
    for h in range(cfg.H):
        chunk = bits[h * cfg.bits_per_hop:(h + 1) * cfg.bits_per_hop]
        pb = chunk[:cfg.N].astype(np.int64)
        codes = unrank_assignment(bits_to_int(chunk[cfg.N:]), cfg.N, cfg.K).items()
        hops.append(FhHopSymbol(codes, pb, np.pi * pb + cfg.zeta))
    return hops


def tx_fh(bits, cfg: FhConfig) -> tuple[list[FhHopSymbol], np.ndarray]:
    """Per-element samples over one PRI, shape ``(N, H * L_hop)``."""
    hops = fh_hop_symbols(bits, cfg)
    x = np.zeros((cfg.N, cfg.H * cfg.L_hop), dtype=complex)
    for h, sym in enumerate(hops):
        seg = slice(h * cfg.L_hop, (h + 1) * cfg.L_hop)
        x[:, seg] = np.exp(1j * sym.theta)[:, None] * cfg.code_tones[list(sym.codes)]
    return hops, x


def rx_fh(y, cfg: FhConfig, gains=None) -> np.ndarray:
    """Hop-wise tone detection on per-element streams ``(N, H * L_hop)`` with known flat gains."""
    y = np.atleast_2d(np.asarray(y, dtype=complex))
    if y.shape != (cfg.N, cfg.H * cfg.L_hop):
        raise CodebookError(f"observation shape {y.shape} does not match ({cfg.N}, {cfg.H * cfg.L_hop})")
    gains = np.ones(cfg.N, dtype=complex) if gains is None else np.asarray(gains, dtype=complex)
    n_codewords = 1 << cfg.code_bits
    rows = np.arange(cfg.N)
    out = []
    for h in range(cfg.H):
        seg = y[:, h * cfg.L_hop:(h + 1) * cfg.L_hop]
        corr = seg @ cfg.code_tones.conj().T / cfg.L_hop
        r = decode_assignment(
            np.abs(corr) ** 2,
            valid=lambda codes: len(set(codes)) == len(codes),
            rank_of=lambda codes: rank_assignment(OrderedAssignment.from_items(codes, cfg.K), full=True),
            n_codewords=n_codewords,
            candidates=lambda i: unrank_assignment(i, cfg.N, cfg.K).items(),
        )
        codes = unrank_assignment(r, cfg.N, cfg.K).items()
        residual = corr[rows, list(codes)] / gains * np.exp(-1j * cfg.zeta)
        out.append((residual.real < 0).astype(np.uint8))
        out.append(int_to_bits(r, cfg.code_bits))
    return np.concatenate(out)


class FhLink:
    name = "fh"

    def __init__(self, cfg: FhConfig):
        self.cfg = cfg
        self.n_bits = cfg.n_bits
        per = np.zeros(cfg.bits_per_hop, dtype=bool)
        per[cfg.N:] = True
        self.index_mask = np.tile(per, cfg.H)

    def transmit(self, bits, rng: RngStream):
        _, x = tx_fh(bits, self.cfg)
        return x, None

    def decode(self, obs, side) -> np.ndarray:
        return rx_fh(obs, self.cfg)
