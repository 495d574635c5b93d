"""Monte-Carlo BER, spectral-efficiency sweeps and beampattern sweeps.

A *link* is any object with ``name``, ``n_bits``, ``index_mask`` (bool per
bit, True for index bits), ``transmit(bits, rng) -> (observation, side)``
and ``decode(observation, side) -> bits``. The observation is what the
decoder sees; the harness adds AWGN to it.

Each trial draws its bits and channel from its own stream, and the same
frames are reused at every SNR point. Noise has separate streams per
``(SNR point, trial)``. Work is split into contiguous chunks and merged in
order, so results do not depend on the thread count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import RngStream, awgn, stream_id
from .spim import SpimConfig, beampattern, draw_channel, isac_se, spim_se

_SIGNAL, _NOISE, _CHANNEL = 0, 1, 2


@dataclass(frozen=True)
class BerResult:
    snr_db: float
    trials: int
    bits: int
    index_bits: int
    errors_index: int
    errors_symbol: int
    signal_power: float
    sigma2: float
    ci: float

    @property
    def symbol_bits(self) -> int:
        return self.bits - self.index_bits

    @property
    def errors(self) -> int:
        return self.errors_index + self.errors_symbol

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else 0.0

    @property
    def ber_index(self) -> float:
        return self.errors_index / self.index_bits if self.index_bits else 0.0

    @property
    def ber_symbol(self) -> float:
        return self.errors_symbol / self.symbol_bits if self.symbol_bits else 0.0

    @property
    def measured_snr_db(self) -> float:
        if self.sigma2 == 0:
            return math.inf
        return 10 * math.log10(self.signal_power / self.sigma2)


@dataclass(frozen=True)
class SweepResult:
    axis: tuple[float, ...]
    values: tuple[float, ...]
    label: str
    config_hash: str

    def __post_init__(self):
        if len(self.axis) != len(self.values):
            raise ValueError("axis and values differ in length")
        if any(b <= a for a, b in zip(self.axis, self.axis[1:])):
            raise ValueError("sweep axis must be strictly increasing")


def config_hash(cfg) -> str:
    text = repr(dataclasses.asdict(cfg)) if dataclasses.is_dataclass(cfg) else repr(cfg)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def wilson_halfwidth(errors: int, n: int, z: float = 1.959963984540054) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0
    p = errors / n
    denom = 1 + z * z / n
    return z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom


def _trial_stream(seed: int, kind: int, point: int, trial: int) -> RngStream:
    return RngStream(seed, stream_id(kind, point, trial >> 16, trial & 0xFFFF))


def _chunks(n: int, threads: int) -> list[range]:
    size = max(1, math.ceil(n / max(1, threads * 4)))
    return [range(s, min(n, s + size)) for s in range(0, n, size)]


def _run_chunks(fn, n: int, threads: int) -> list:
    chunks = _chunks(n, threads)
    if threads <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, chunks))


def _frame(link, seed: int, trial: int):
    rng = _trial_stream(seed, _SIGNAL, 0, trial)
    bits = rng.bits(link.n_bits)
    obs, side = link.transmit(bits, rng)
    return bits, np.asarray(obs), side


def monte_carlo_ber(link, snr_db, trials: int, seed: int, threads: int = 1) -> list[BerResult]:
    """BER per SNR point; ``inf`` means no noise.

    The noise power is ``P / snr`` with ``P`` the mean observation power
    per complex sample measured over the run's own frames.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    snr_db = [float(s) for s in snr_db]
    if len(snr_db) >= 1 << 16:
        raise ValueError("too many SNR points")
    mask = np.asarray(link.index_mask, dtype=bool)

    def power(chunk):
        return [float(np.mean(np.abs(_frame(link, seed, t)[1]) ** 2)) for t in chunk]

    powers = [p for part in _run_chunks(power, trials, threads) for p in part]
    P = float(np.mean(powers))
    sigma2 = [0.0 if math.isinf(s) and s > 0 else P / 10 ** (s / 10) for s in snr_db]

    def count(chunk):
        errs = np.zeros((len(snr_db), 2), dtype=np.int64)
        for t in chunk:
            bits, obs, side = _frame(link, seed, t)
            for k, s2 in enumerate(sigma2):
                y = awgn(obs, s2, _trial_stream(seed, _NOISE, k, t)) if s2 > 0 else obs
                wrong = np.asarray(link.decode(y, side), dtype=np.uint8) != bits
                errs[k, 0] += int(np.count_nonzero(wrong & mask))
                errs[k, 1] += int(np.count_nonzero(wrong & ~mask))
        return errs

    errs = sum(_run_chunks(count, trials, threads))
    n_bits = trials * link.n_bits
    n_index = trials * int(mask.sum())
    return [BerResult(s, trials, n_bits, n_index, int(e[0]), int(e[1]), P, s2,
                      wilson_halfwidth(int(e.sum()), n_bits))
            for s, s2, e in zip(snr_db, sigma2, errs)]


def se_sweep(cfg: SpimConfig, n_channels: int, snr_db, seed: int,
             threads: int = 1) -> tuple[SweepResult, SweepResult]:
    """Channel-averaged SE of index modulation and of the first-pattern baseline.

    SNR is transmit power over ``cfg.sigma2``: each channel is scaled by
    ``sqrt(snr)`` while the noise power stays fixed.
    """
    if n_channels < 1:
        raise ValueError("need at least one channel draw")
    snr_db = [float(s) for s in snr_db]
    gains = [math.sqrt(10 ** (s / 10)) for s in snr_db]

    def run(chunk):
        out = []
        for c in chunk:
            H = draw_channel(cfg, _trial_stream(seed, _CHANNEL, 0, c))
            out.append([(spim_se(cfg, g * H), isac_se(cfg, g * H)) for g in gains])
        return out

    table = np.array([row for part in _run_chunks(run, n_channels, threads) for row in part])
    mean = table.mean(axis=0)
    h = config_hash(cfg)
    return (SweepResult(tuple(snr_db), tuple(float(v) for v in mean[:, 0]), "spim", h),
            SweepResult(tuple(snr_db), tuple(float(v) for v in mean[:, 1]), "isac", h))


def beampattern_sweep(cfg: SpimConfig, etas, thetas, pattern: int = 0) -> list[SweepResult]:
    """Normalised transmit beampattern (dB) over ``thetas`` for each ``eta``."""
    thetas = tuple(float(t) for t in thetas)
    out = []
    for eta in etas:
        c = dataclasses.replace(cfg, eta=float(eta))
        p = beampattern(c.beamformers[pattern], c.geometry, thetas)
        out.append(SweepResult(thetas, tuple(float(v) for v in p), f"eta={float(eta):g}", config_hash(c)))
    return out
