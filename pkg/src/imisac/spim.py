"""Spatial-path index modulation with hybrid analog/digital beamforming.

Index bits choose which ``L_s`` of the ``L_C`` user paths the communication
RF chains steer to; the radar chains always steer to the targets. ``eta``
is the share of transmit power given to the communication chains, so
``eta = 0`` is radar only and ``eta = 1`` is communication only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channel import RngStream, geometric_channel
from .codebook import (CodebookError, SelectionPattern, bits_for_selection, bits_to_int,
                       int_to_bits, unrank_combination)
from .constellation import bits_per_symbol, labels_to_bits, psk_modulate, psk_points
from .waveforms import ArrayGeometry, steering_matrix


@dataclass(frozen=True)
class SpimConfig:
    """Angles in radians. ``N_rx`` is the number of user antennas."""

    N: int = 16
    N_rx: int = 4
    radar_angles: tuple[float, ...] = (float(np.deg2rad(40.0)),)
    user_angles: tuple[float, ...] = (float(np.deg2rad(50.0)), float(np.deg2rad(60.0)))
    L_s: int = 1
    N_S: int = 1
    M: int = 4
    sigma2: float = 1.0
    eta: float = 0.5
    f_c: float = 28e9

    def __post_init__(self):
        if not 1 <= self.L_s <= self.L_C:
            raise CodebookError(f"need 1 <= L_s <= L_C, got L_s={self.L_s}, L_C={self.L_C}")
        if not 1 <= self.N_S <= self.N_RF:
            raise CodebookError(f"need 1 <= N_S <= N_RF={self.N_RF}, got {self.N_S}")
        if not 0.0 <= self.eta <= 1.0:
            raise CodebookError(f"eta must lie in [0, 1], got {self.eta}")
        if not self.sigma2 > 0:
            raise CodebookError("noise power must be positive")
        angles = list(self.radar_angles) + list(self.user_angles)
        if len(set(angles)) != len(angles):
            raise CodebookError("radar and user path angles must be distinct")
        bits_per_symbol(self.M)

    @property
    def L_R(self) -> int:
        return len(self.radar_angles)

    @property
    def L_C(self) -> int:
        return len(self.user_angles)

    @property
    def N_RF(self) -> int:
        return self.L_R + self.L_s

    @property
    def index_bits(self) -> int:
        return bits_for_selection(self.L_s, self.L_C)

    @property
    def S(self) -> int:
        return 1 << self.index_bits

    @property
    def symbol_bits(self) -> int:
        return self.N_S * bits_per_symbol(self.M)

    @property
    def n_bits(self) -> int:
        return self.index_bits + self.symbol_bits

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N, self.f_c)

    @property
    def rx_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N_rx, self.f_c)

    @cached_property
    def beamformers(self) -> list["HybridBeamformer"]:
        return [build_beamformer(self, p) for p in build_patterns(self)]

    @cached_property
    def symbol_hypotheses(self) -> tuple[np.ndarray, np.ndarray]:
        """All symbol-label tuples (rows) and their PSK vectors."""
        labels = np.array(list(itertools.product(range(self.M), repeat=self.N_S)), dtype=np.int64)
        return labels, psk_points(self.M)[labels]


@dataclass(frozen=True)
class SpatialPattern:
    """``index`` is 0-based; ``B`` is ``L_s x L_C`` with one-hot rows."""

    index: int
    paths: SelectionPattern

    @property
    def B(self) -> np.ndarray:
        B = np.zeros((self.paths.k, self.paths.n))
        B[np.arange(self.paths.k), list(self.paths.indices)] = 1.0
        return B


@dataclass
class HybridBeamformer:
    F_RF: np.ndarray
    F_BB: np.ndarray

    @property
    def F(self) -> np.ndarray:
        return self.F_RF @ self.F_BB


def build_patterns(cfg: SpimConfig) -> list[SpatialPattern]:
    return [SpatialPattern(i, unrank_combination(i, cfg.L_s, cfg.L_C)) for i in range(cfg.S)]


def _stream_mixer(n_rf: int, n_s: int) -> np.ndarray:
    """First ``n_s`` columns of the unitary ``n_rf``-point DFT matrix."""
    r = np.arange(n_rf)
    return np.exp(-2j * np.pi * np.outer(r, np.arange(n_s)) / n_rf) / np.sqrt(n_rf)


def build_beamformer(cfg: SpimConfig, pattern: SpatialPattern) -> HybridBeamformer:
    """``F_RF = [F_R | A_C B^T]``; ``F_BB = D W`` scaled so ``||F_RF F_BB||_F^2 = N_S``.

    ``D`` gives each radar chain power ``(1 - eta) / L_R`` and each
    communication chain ``eta / L_s``; ``W`` spreads the streams across chains.
    """
    F_R = steering_matrix(cfg.geometry, cfg.radar_angles)
    A_C = steering_matrix(cfg.geometry, cfg.user_angles)
    F_RF = np.hstack([F_R, A_C @ pattern.B.T])
    power = np.concatenate([np.full(cfg.L_R, (1.0 - cfg.eta) / cfg.L_R),
                            np.full(cfg.L_s, cfg.eta / cfg.L_s)])
    F_BB = np.sqrt(power)[:, None] * _stream_mixer(cfg.N_RF, cfg.N_S)
    norm = np.linalg.norm(F_RF @ F_BB)
    if norm == 0:
        raise CodebookError("beamformer has zero output power")
    return HybridBeamformer(F_RF, F_BB * (np.sqrt(cfg.N_S) / norm))


def _covariances(cfg: SpimConfig, H: np.ndarray, beamformers) -> list[np.ndarray]:
    H = np.asarray(H, dtype=complex)
    if H.shape != (cfg.N_rx, cfg.N):
        raise CodebookError(f"channel shape {H.shape} does not match ({cfg.N_rx}, {cfg.N})")
    out = []
    for bf in beamformers:
        G = H @ bf.F
        out.append(np.eye(cfg.N_rx) + (G @ G.conj().T) / (cfg.sigma2 * cfg.N_S))
    return out


def _logdet2(A: np.ndarray) -> float:
    sign, logabs = np.linalg.slogdet(A)
    if not sign.real > 0:
        raise FloatingPointError("covariance sum is not positive definite")
    return float(logabs / np.log(2.0))


def spim_se(cfg: SpimConfig, H, beamformers=None) -> float:
    """``log2(2^S / (2 sigma2)^N_rx) - (1/S) sum_i log2 sum_j det(Sigma_i + Sigma_j)^-1``."""
    beamformers = cfg.beamformers if beamformers is None else beamformers
    if len(beamformers) != cfg.S:
        raise CodebookError(f"need {cfg.S} beamformers, got {len(beamformers)}")
    sig = _covariances(cfg, H, beamformers)
    S = cfg.S
    # log2 det(Sigma_i + Sigma_j) for every pair; the inner sum is done as a log-sum-exp
    ld = np.array([[_logdet2(sig[i] + sig[j]) for j in range(S)] for i in range(S)])
    inner = np.logaddexp2.reduce(-ld, axis=1)
    return float(S - cfg.N_rx * np.log2(2 * cfg.sigma2) - inner.mean())


def isac_se(cfg: SpimConfig, H, beamformer: HybridBeamformer | None = None) -> float:
    """``log2 det Sigma_1`` for the first pattern only."""
    bf = cfg.beamformers[0] if beamformer is None else beamformer
    return _logdet2(_covariances(cfg, H, [bf])[0])


def tx_spim(bits, cfg: SpimConfig) -> tuple[int, np.ndarray, np.ndarray]:
    """Returns ``(pattern index, symbols s, x = F_RF F_BB s)``; index bits come first."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != cfg.n_bits:
        raise CodebookError(f"expected {cfg.n_bits} bits, got {bits.size}")
    i = bits_to_int(bits[:cfg.index_bits])
    s = psk_modulate(bits[cfg.index_bits:], cfg.M) if cfg.M > 1 else np.ones(cfg.N_S, dtype=complex)
    return i, s, cfg.beamformers[i].F @ s


def decode_spim(y, H, cfg: SpimConfig) -> np.ndarray:
    """Joint ML over (pattern, symbol vector); ties go to the lower pattern then lower labels."""
    y = np.asarray(y, dtype=complex).ravel()
    H = np.asarray(H, dtype=complex)
    labels, vecs = cfg.symbol_hypotheses
    best = None
    for i, bf in enumerate(cfg.beamformers):
        pred = (H @ bf.F) @ vecs.T
        cost = (np.abs(y[:, None] - pred) ** 2).sum(axis=0)
        j = int(np.argmin(cost))
        if best is None or cost[j] < best[0]:
            best = (cost[j], i, j)
    _, i, j = best
    out = [int_to_bits(i, cfg.index_bits)]
    if cfg.M > 1:
        out.append(labels_to_bits(labels[j], cfg.M))
    return np.concatenate(out)


def beampattern(F: np.ndarray | HybridBeamformer, geom: ArrayGeometry, thetas) -> np.ndarray:
    """``||a(theta)^H F||^2`` in dB relative to its maximum over ``thetas``."""
    F = F.F if isinstance(F, HybridBeamformer) else np.atleast_2d(np.asarray(F, dtype=complex))
    if F.shape[0] != geom.N:
        F = F.T
    A = steering_matrix(geom, thetas)
    p = (np.abs(A.conj().T @ F) ** 2).sum(axis=1)
    if p.max() <= 0:
        raise FloatingPointError("beampattern is identically zero")
    with np.errstate(divide="ignore"):
        return 10 * np.log10(p / p.max())


def draw_channel(cfg: SpimConfig, rng: RngStream) -> np.ndarray:
    """Geometric user channel over the configured transmit-side path angles."""
    return geometric_channel(cfg.geometry, cfg.rx_geometry, cfg.user_angles, rng)


class SpimLink:
    """A fresh geometric channel per frame, known at the receiver."""

    name = "spim"

    def __init__(self, cfg: SpimConfig):
        self.cfg = cfg
        self.n_bits = cfg.n_bits
        self.index_mask = np.zeros(cfg.n_bits, dtype=bool)
        self.index_mask[:cfg.index_bits] = True

    def transmit(self, bits, rng: RngStream):
        _, _, x = tx_spim(bits, self.cfg)
        H = draw_channel(self.cfg, rng)
        return H @ x, H

    def decode(self, obs, H) -> np.ndarray:
        return decode_spim(obs, H, self.cfg)
