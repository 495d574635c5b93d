"""Array responses, selection matrices and sampled baseband waveforms.

Inner products and energies are discrete sums over samples
(``<x, y> = sum(x * conj(y))``), so an orthonormal bank has unit sample
energy and a matched filter is a plain ``vdot``. Time integrals such as
the rectangle area use ``sum / fs``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class WaveformError(ValueError):
    """Invalid waveform or array parameters."""


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array; ``d`` defaults to half a wavelength."""

    N: int
    f_c: float = 28e9
    d: float | None = None

    def __post_init__(self):
        if self.N < 1:
            raise WaveformError(f"array needs N >= 1 elements, got {self.N}")
        if self.f_c <= 0:
            raise WaveformError("carrier frequency must be positive")
        if self.d is None:
            object.__setattr__(self, "d", self.wavelength / 2)
        if self.d <= 0:
            raise WaveformError("element spacing must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def spacing_wavelengths(self) -> float:
        return self.d / self.wavelength


def _check_angle(theta) -> None:
    if np.any(np.abs(theta) > np.pi / 2):
        raise WaveformError("angles must lie in [-pi/2, pi/2]")


def steering(geom: ArrayGeometry, theta: float) -> np.ndarray:
    """Array response ``exp(j 2 pi (d / lambda) n sin(theta))``, broadside at 0."""
    _check_angle(theta)
    n = np.arange(geom.N)
    return np.exp(2j * np.pi * geom.spacing_wavelengths * n * np.sin(theta))


def steering_matrix(geom: ArrayGeometry, thetas: Sequence[float]) -> np.ndarray:
    """Steering vectors as columns, shape ``(N, len(thetas))``."""
    thetas = np.asarray(thetas, dtype=float)
    _check_angle(thetas)
    n = np.arange(geom.N)[:, None]
    return np.exp(2j * np.pi * geom.spacing_wavelengths * n * np.sin(thetas)[None, :])


@dataclass(frozen=True)
class SelectionMatrix:
    """Row ``r`` picks element ``chosen[r]`` out of ``n_cols``."""

    chosen: tuple[int, ...]
    n_cols: int

    def __post_init__(self):
        chosen = tuple(int(c) for c in self.chosen)
        object.__setattr__(self, "chosen", chosen)
        if len(set(chosen)) != len(chosen):
            raise WaveformError(f"selection columns must be distinct: {chosen}")
        if any(c < 0 or c >= self.n_cols for c in chosen):
            raise WaveformError(f"selection {chosen} outside [0, {self.n_cols})")

    @property
    def n_rows(self) -> int:
        return len(self.chosen)

    def matrix(self) -> np.ndarray:
        Q = np.zeros((self.n_rows, self.n_cols))
        Q[np.arange(self.n_rows), list(self.chosen)] = 1.0
        return Q


def sparse_steering(Q: SelectionMatrix, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.shape != (Q.n_cols,):
        raise WaveformError(f"steering vector of length {a.shape} does not match {Q.n_cols} columns")
    return a[list(Q.chosen)]


@dataclass
class SampledWaveform:
    samples: np.ndarray
    fs: float
    t0: float = 0.0

    def __post_init__(self):
        if self.fs <= 0:
            raise WaveformError("sample rate must be positive")
        self.samples = np.asarray(self.samples)

    def __len__(self) -> int:
        return self.samples.shape[-1]

    @property
    def duration(self) -> float:
        return len(self) / self.fs

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) / self.fs

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def inner(self, other: "SampledWaveform") -> complex:
        return complex(np.vdot(other.samples, self.samples))


def samples_in(duration: float, fs: float) -> int:
    """Integer sample count of ``duration`` at ``fs``; rejects non-integral products."""
    L = int(round(duration * fs))
    if L < 1 or abs(L - duration * fs) > 1e-6 * max(1.0, L):
        raise WaveformError(f"duration {duration} s is not an integer number of samples at fs={fs}")
    return L


@dataclass(frozen=True)
class FmcwSpec:
    """Chirp of rate ``kappa`` lasting ``chirp_duration``, repeated every ``pri``.

    The frequency step between slots is ``1 / (kappa * pri)``.
    """

    kappa: float
    chirp_duration: float
    pri: float
    K: int = 1

    def __post_init__(self):
        if self.kappa <= 0:
            raise WaveformError("chirp rate must be positive")
        if self.pri > self.chirp_duration:
            raise WaveformError("PRI must not exceed the chirp duration")
        if self.K < 1:
            raise WaveformError("need at least one frequency slot")

    @property
    def delta_f(self) -> float:
        return 1.0 / (self.kappa * self.pri)


def fmcw_chirp(spec: FmcwSpec, fs: float) -> SampledWaveform:
    """Baseband chirp ``exp(j pi kappa t^2)``, truncated to one PRI."""
    if fs < 2 * spec.kappa * spec.chirp_duration:
        raise WaveformError(f"fs={fs} undersamples the swept band {spec.kappa * spec.chirp_duration}")
    L = samples_in(spec.pri, fs)
    t = np.arange(L) / fs
    return SampledWaveform(np.exp(1j * np.pi * spec.kappa * t**2), fs)


@dataclass(frozen=True)
class FhSpec:
    """Frequency hopping: ``H`` hops of ``pri / H`` seconds, codes in units of ``delta_f``."""

    H: int
    delta_f: float
    pri: float
    codes: tuple[int, ...] = field(default=(0, 1))

    def __post_init__(self):
        if self.H < 1:
            raise WaveformError("need at least one hop")
        if self.pri <= 0 or self.delta_f <= 0:
            raise WaveformError("PRI and frequency step must be positive")

    @property
    def delta_t(self) -> float:
        return self.pri / self.H


def fh_subpulse(code: int, spec: FhSpec, hop: int, fs: float) -> SampledWaveform:
    """Tone ``exp(j 2 pi c delta_f t)`` gated to hop ``hop`` over one PRI of samples."""
    if code not in spec.codes:
        raise WaveformError(f"code {code} not in the code set {spec.codes}")
    if not 0 <= hop < spec.H:
        raise WaveformError(f"hop {hop} outside [0, {spec.H})")
    L_hop = samples_in(spec.delta_t, fs)
    t = np.arange(L_hop * spec.H) / fs
    gate = (np.arange(t.size) // L_hop) == hop
    return SampledWaveform(np.exp(2j * np.pi * code * spec.delta_f * t) * gate, fs)


def tone_bank(n_tones: int, L: int) -> np.ndarray:
    """Rows are unit-energy tones at integer multiples of ``fs / L``."""
    m = np.arange(L)
    return np.exp(2j * np.pi * np.outer(np.arange(n_tones), m) / L) / np.sqrt(L)


def orthogonal_waveform_bank(N_s: int, T: float, fs: float) -> list[SampledWaveform]:
    """``N_s`` orthonormal tones spaced ``1 / T`` apart over one pulse."""
    L = samples_in(T, fs)
    if N_s > L:
        raise WaveformError(f"{N_s} orthogonal waveforms need at least {N_s} samples, pulse has {L}")
    return [SampledWaveform(row, fs) for row in tone_bank(N_s, L)]


def rect_window(t0: float, T: float, fs: float, span: float | None = None) -> SampledWaveform:
    """Indicator of ``[t0, t0 + T)`` sampled on ``[0, span)``; ``span`` defaults to ``t0 + 2T``."""
    if T <= 0:
        raise WaveformError("window length must be positive")
    span = t0 + 2 * T if span is None else span
    n = int(np.ceil(span * fs - 1e-9))
    t = np.arange(n) / fs
    # tolerate rounding of t0 * fs onto the sample grid
    eps = 1e-9 / fs
    return SampledWaveform(((t >= t0 - eps) & (t < t0 + T - eps)).astype(float), fs)
