"""Gray-labelled M-PSK mapping shared by every scheme that carries symbol bits."""

from __future__ import annotations

import numpy as np

from .codebook import CodebookError


def bits_per_symbol(M: int) -> int:
    if M < 1 or M & (M - 1):
        raise CodebookError(f"constellation order M={M} must be a power of two")
    return M.bit_length() - 1


def psk_points(M: int) -> np.ndarray:
    """Constellation point for each integer label ``0..M-1`` (Gray labelled)."""
    m = bits_per_symbol(M)
    if m == 0:
        return np.ones(1, dtype=complex)
    pos = np.arange(M)
    gray = pos ^ (pos >> 1)
    pts = np.empty(M, dtype=complex)
    # label gray[p] sits at angle position p
    pts[gray] = np.exp(2j * np.pi * pos / M)
    return pts


def psk_modulate(bits, M: int) -> np.ndarray:
    """Map a flat bit array (length multiple of log2 M) to PSK symbols."""
    m = bits_per_symbol(M)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if m == 0:
        if bits.size:
            raise CodebookError("M=1 carries no symbol bits")
        return np.ones(0, dtype=complex)
    if bits.size % m:
        raise CodebookError(f"{bits.size} bits is not a multiple of log2(M)={m}")
    weights = 1 << np.arange(m - 1, -1, -1)
    labels = bits.reshape(-1, m) @ weights
    return psk_points(M)[labels]


def psk_labels(values, M: int) -> np.ndarray:
    """Nearest-point labels for complex values (phase decision)."""
    values = np.asarray(values, dtype=complex)
    if M == 1:
        return np.zeros(values.shape, dtype=np.int64)
    pts = psk_points(M)
    d = np.abs(values[..., None] - pts)
    return np.argmin(d, axis=-1)


def labels_to_bits(labels, M: int) -> np.ndarray:
    m = bits_per_symbol(M)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    shifts = np.arange(m - 1, -1, -1)
    return ((labels[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def psk_demodulate(values, M: int) -> np.ndarray:
    return labels_to_bits(psk_labels(values, M), M)
