"""Sparse-array antenna index modulation.

Each pulse, index bits pick which ``N_s`` of ``N`` transmit elements are
active (row ``r`` of the selection emits waveform ``r`` of an orthonormal
bank). With ``M >= 2`` every active element's waveform is additionally
scaled by an M-PSK symbol.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channel import RngStream
from .codebook import (CodebookError, SelectionPattern, bits_to_int, binomial, floor_log2,
                       int_to_bits, unrank_combination)
from .constellation import bits_per_symbol, labels_to_bits, psk_modulate, psk_points
from .waveforms import ArrayGeometry, SelectionMatrix, steering, steering_matrix, tone_bank


@dataclass(frozen=True)
class AntennaImConfig:
    N: int
    N_s: int
    N_rx: int = 4
    M: int = 1
    L: int = 32
    f_c: float = 28e9
    max_sidelobe_db: float | None = None
    sidelobe_grid: int = 721

    def __post_init__(self):
        if not 1 <= self.N_s <= self.N:
            raise CodebookError(f"need 1 <= N_s <= N, got N_s={self.N_s}, N={self.N}")
        if self.N_s > self.L:
            raise CodebookError(f"{self.N_s} orthogonal waveforms need L >= N_s samples")
        bits_per_symbol(self.M)

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N, self.f_c)

    @property
    def rx_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.N_rx, self.f_c)

    @cached_property
    def patterns(self) -> list[SelectionPattern]:
        """Usable subarrays in codeword order."""
        if self.max_sidelobe_db is None:
            count = binomial(self.N_s, self.N)
            return [unrank_combination(i, self.N_s, self.N) for i in range(1 << floor_log2(count))]
        ok = [p for p in (unrank_combination(i, self.N_s, self.N, full=True)
                          for i in range(binomial(self.N_s, self.N)))
              if peak_sidelobe_db(p, self.geometry, self.sidelobe_grid) <= self.max_sidelobe_db]
        if not ok:
            raise CodebookError(f"no subarray meets the {self.max_sidelobe_db} dB sidelobe limit")
        return ok[:1 << floor_log2(len(ok))]

    @property
    def index_bits(self) -> int:
        return floor_log2(len(self.patterns))

    @property
    def symbol_bits(self) -> int:
        return self.N_s * bits_per_symbol(self.M)

    @property
    def n_bits(self) -> int:
        return self.index_bits + self.symbol_bits

    @cached_property
    def bank(self) -> np.ndarray:
        return tone_bank(self.N_s, self.L)


def peak_sidelobe_db(pattern: SelectionPattern, geom: ArrayGeometry, n_grid: int = 721) -> float:
    """Peak sidelobe of the broadside beam of the subarray, relative to its mainlobe.

    The mainlobe extends to the first null (local minimum) on each side of broadside.
    """
    thetas = np.linspace(-np.pi / 2, np.pi / 2, n_grid)
    A = steering_matrix(geom, thetas)[list(pattern.indices)]
    p = np.abs(A.sum(axis=0)) ** 2
    p = p / p.max()
    c = n_grid // 2
    lo = c
    while lo > 0 and p[lo - 1] < p[lo]:
        lo -= 1
    hi = c
    while hi < n_grid - 1 and p[hi + 1] < p[hi]:
        hi += 1
    side = np.concatenate([p[:lo], p[hi + 1:]])
    if side.size == 0 or side.max() <= 0:
        return -np.inf
    return float(10 * np.log10(side.max()))


@dataclass
class AntennaImFrame:
    selection: SelectionMatrix
    symbols: np.ndarray | None
    waveforms: np.ndarray = field(repr=False)

    def emitted(self) -> np.ndarray:
        """Rows emitted by the selected elements (bank rows scaled by symbols)."""
        return self.waveforms[list(self.selection.chosen)]


def tx_antenna_im(bits, cfg: AntennaImConfig) -> AntennaImFrame:
    """Per-pulse transmitter; index bits first, then PSK symbol bits."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if bits.size != cfg.n_bits:
        raise CodebookError(f"expected {cfg.n_bits} bits, got {bits.size}")
    pattern = cfg.patterns[bits_to_int(bits[:cfg.index_bits])]
    Q = SelectionMatrix(pattern.indices, cfg.N)
    symbols = psk_modulate(bits[cfg.index_bits:], cfg.M) if cfg.M > 1 else None
    rows = cfg.bank if symbols is None else symbols[:, None] * cfg.bank
    x = np.zeros((cfg.N, cfg.L), dtype=complex)
    x[list(pattern.indices)] = rows
    return AntennaImFrame(Q, symbols, x)


def user_signal(frame: AntennaImFrame, cfg: AntennaImConfig, phi: float,
                alpha_c: complex) -> np.ndarray:
    """Noiseless single-antenna user waveform ``alpha_C a(phi)^T x(t)``."""
    return alpha_c * (steering(cfg.geometry, phi) @ frame.waveforms)


def user_matched_filter(y, bank) -> np.ndarray:
    """Correlate the user waveform against each bank row."""
    return np.asarray(bank).conj() @ np.asarray(y)


def _candidate_steering(cfg: AntennaImConfig, phi: float) -> np.ndarray:
    a = steering(cfg.geometry, phi)
    return np.array([a[list(p.indices)] for p in cfg.patterns])


def decode_antenna_im(y_c, alpha_c: complex, phi: float, cfg: AntennaImConfig) -> np.ndarray:
    """Maximum-likelihood subarray and symbol decision.

    Minimises ``||y_c / alpha_c - diag(s) a_i||`` over codewords ``i`` and
    symbol vectors ``s``. The symbol choice separates per entry, so each
    candidate costs one nearest-point search per entry. Ties go to the lower
    codeword.
    """
    z = np.asarray(y_c, dtype=complex) / alpha_c
    cand = _candidate_steering(cfg, phi)
    pts = psk_points(cfg.M)
    # dist[i, n, m] = |z_n - s_m a_in|^2
    dist = np.abs(z[None, :, None] - cand[:, :, None] * pts[None, None, :]) ** 2
    best_label = np.argmin(dist, axis=2)
    cost = np.take_along_axis(dist, best_label[..., None], axis=2)[..., 0].sum(axis=1)
    i = int(np.argmin(cost))
    out = [int_to_bits(i, cfg.index_bits)]
    if cfg.M > 1:
        out.append(labels_to_bits(best_label[i], cfg.M))
    return np.concatenate(out)


def ml_hypotheses(cfg: AntennaImConfig):
    """Every (codeword, symbol-label tuple) in decoding order."""
    labels = list(itertools.product(range(cfg.M), repeat=cfg.N_s)) if cfg.M > 1 else [()]
    return [(i, s) for i in range(len(cfg.patterns)) for s in labels]


def radar_receive(y, bank) -> np.ndarray:
    """Matched-filter stack ``vec(Y Psi^H)``, length ``N_rx * N_s`` (column-major)."""
    Y = np.asarray(y) @ np.asarray(bank).conj().T
    return Y.ravel(order="F")


def radar_model(scene_angles, scene_alphas, Q: SelectionMatrix, cfg: AntennaImConfig) -> np.ndarray:
    """Noise-free matched-filter output ``sum_r alpha_r (Q a(theta_r)) kron a_rx(theta_r)``."""
    out = np.zeros(cfg.N_rx * Q.n_rows, dtype=complex)
    for theta, alpha in zip(scene_angles, scene_alphas):
        a_bar = steering(cfg.geometry, theta)[list(Q.chosen)]
        out += alpha * np.kron(a_bar, steering(cfg.rx_geometry, theta))
    return out


class AntennaLink:
    """User link: fixed direction ``phi`` and gain ``alpha_c``; noise enters after the matched filter."""

    name = "antenna"

    def __init__(self, cfg: AntennaImConfig, phi: float = np.deg2rad(20.0), alpha_c: complex = 1.0):
        self.cfg = cfg
        self.phi = phi
        self.alpha_c = alpha_c
        self.n_bits = cfg.n_bits
        self.index_mask = np.zeros(cfg.n_bits, dtype=bool)
        self.index_mask[:cfg.index_bits] = True

    def transmit(self, bits, rng: RngStream):
        frame = tx_antenna_im(bits, self.cfg)
        y = user_signal(frame, self.cfg, self.phi, self.alpha_c)
        return user_matched_filter(y, self.cfg.bank), None

    def decode(self, obs, side) -> np.ndarray:
        return decode_antenna_im(obs, self.alpha_c, self.phi, self.cfg)
