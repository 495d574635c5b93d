"""Random streams, noise and channel generators shared by all schemes.

Randomness comes from Philox4x64-10 keyed directly with ``(seed, stream)``
(key word 0 = seed, key word 1 = stream id, counter starting at zero).
Uniform doubles use the top 53 bits of each 64-bit output. Gaussians are
drawn with Box-Muller on explicit uniform pairs, so another implementation
of Philox reproduces every draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .waveforms import ArrayGeometry, SelectionMatrix, sparse_steering, steering

_MASK64 = (1 << 64) - 1


class RngStream:
    """Independent, reproducible random stream identified by ``(seed, stream)``."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        key = self.seed | (self.stream << 64)
        self._bitgen = np.random.Philox(key=key, counter=0)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    def raw(self, size: int) -> np.ndarray:
        return self._bitgen.random_raw(size).astype(np.uint64)

    def uniform(self, size) -> np.ndarray:
        """Doubles in ``[0, 1)``."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        return ((self.raw(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(shape)

    def standard_normal(self, size) -> np.ndarray:
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        m = (n + 1) // 2
        u = self.uniform(2 * m)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log1p(-u1))
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(2 * np.pi * u2)
        z[1::2] = r * np.sin(2 * np.pi * u2)
        return z[:n].reshape(shape)

    def complex_normal(self, size, var: float = 1.0) -> np.ndarray:
        """Circularly-symmetric complex Gaussian, ``E|z|^2 = var``."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        z = self.standard_normal(shape + (2,))
        return np.sqrt(var / 2.0) * (z[..., 0] + 1j * z[..., 1])

    def bits(self, n: int) -> np.ndarray:
        return (self.raw(n) >> np.uint64(63)).astype(np.uint8)

    def integers(self, high: int, size: int) -> np.ndarray:
        """Integers in ``[0, high)`` from the top bits of each uniform (tiny bias is irrelevant here)."""
        return np.minimum((self.uniform(size) * high).astype(np.int64), high - 1)


def stream_id(*parts: int) -> int:
    """Pack small non-negative integers into one stream id (16 bits each, at most 4 parts)."""
    if len(parts) > 4:
        raise ValueError("at most four stream id components")
    sid = 0
    for p in parts:
        if not 0 <= p < 1 << 16:
            raise ValueError(f"stream id component {p} outside [0, 65536)")
        sid = (sid << 16) | int(p)
    return sid


@dataclass(frozen=True)
class NoiseSpec:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError("noise power must be positive")

    @classmethod
    def from_snr_db(cls, signal_power: float, snr_db: float) -> "NoiseSpec":
        return cls(signal_power / 10 ** (snr_db / 10))


def awgn(x, sigma2: float, rng: RngStream) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if sigma2 < 0:
        raise ValueError("noise power must be non-negative")
    if sigma2 == 0:
        return x.copy()
    return x + rng.complex_normal(x.shape, sigma2)


def rayleigh_gains(count: int, rng: RngStream) -> np.ndarray:
    return rng.complex_normal(count, 1.0)


@dataclass(frozen=True)
class TargetScene:
    """Point targets: angles in radians and complex reflection coefficients."""

    angles: tuple[float, ...] = ()
    alphas: tuple[complex, ...] = ()

    def __post_init__(self):
        if len(self.angles) != len(self.alphas):
            raise ValueError("need one reflection coefficient per target")
        if len(set(self.angles)) != len(self.angles):
            raise ValueError("target angles must be distinct")
        if not np.all(np.isfinite(np.asarray(self.alphas, dtype=complex))):
            raise ValueError("reflection coefficients must be finite")

    def __len__(self) -> int:
        return len(self.angles)


def synthesize_echo(scene: TargetScene, Q: SelectionMatrix, waveforms: np.ndarray,
                    tx: ArrayGeometry, rx: ArrayGeometry, sigma2: float = 0.0,
                    rng: RngStream | None = None) -> np.ndarray:
    """Receive-array output, shape ``(rx.N, L)``.

    ``waveforms`` holds one row per selected transmit element (row ``r`` is
    emitted by element ``Q.chosen[r]``).
    """
    waveforms = np.atleast_2d(np.asarray(waveforms, dtype=complex))
    if waveforms.shape[0] != Q.n_rows:
        raise ValueError(f"{waveforms.shape[0]} waveforms for {Q.n_rows} selected elements")
    y = np.zeros((rx.N, waveforms.shape[1]), dtype=complex)
    for theta, alpha in zip(scene.angles, scene.alphas):
        a_bar = sparse_steering(Q, steering(tx, theta))
        y += alpha * np.outer(steering(rx, theta), a_bar @ waveforms)
    if sigma2 > 0:
        if rng is None:
            raise ValueError("noisy echo synthesis needs an RngStream")
        y = awgn(y, sigma2, rng)
    return y


def geometric_channel(tx: ArrayGeometry, rx: ArrayGeometry, tx_angles, rng: RngStream,
                      rx_angles=None) -> np.ndarray:
    """``H = sum_l beta_l a_rx(psi_l) a_tx(phi_l)^H`` with unit-variance complex gains.

    Receive-side angles are drawn uniformly over ``(-pi/2, pi/2)`` unless given.
    """
    tx_angles = np.asarray(tx_angles, dtype=float)
    L = tx_angles.size
    beta = rng.complex_normal(L)
    if rx_angles is None:
        rx_angles = (rng.uniform(L) - 0.5) * np.pi
    H = np.zeros((rx.N, tx.N), dtype=complex)
    for b, phi, psi in zip(beta, tx_angles, np.asarray(rx_angles, dtype=float)):
        H += b * np.outer(steering(rx, psi), steering(tx, phi).conj())
    return H
