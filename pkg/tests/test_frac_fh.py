import itertools

import numpy as np
import pytest

from imisac.channel import RngStream, awgn, rayleigh_gains
from imisac.codebook import CodebookError, int_to_bits
from imisac.frac_fh import (FhConfig, FracConfig, FracLink, fh_hop_symbols, frac_dictionary,
                            rx_fh, rx_frac, split_frac_bits, tx_fh, tx_frac)
from imisac.metrics import monte_carlo_ber
from imisac.waveforms import FmcwSpec, WaveformError, fmcw_chirp, steering


def frac_ml_oracle(y, cfg, h):
    """Direct joint ML over every codeword bit string, re-synthesising each hypothesis."""
    best = None
    for v in range(1 << cfg.n_bits):
        bits = int_to_bits(v, cfg.n_bits)
        _, x = tx_frac(bits, cfg)
        d = np.sum(np.abs(y - (h @ x).ravel()) ** 2)
        if best is None or d < best[0] - 1e-12:
            best = (d, bits)
    return best[1]


def ls_support_oracle(y, Phi, k):
    """Support of size k with the smallest least-squares residual among all supports."""
    best = None
    for sup in itertools.combinations(range(Phi.shape[1]), k):
        A = Phi[:, sup]
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        r = np.linalg.norm(y - A @ coef)
        if best is None or r < best[0] - 1e-9:
            best = (r, sup)
    return best[1]


def test_degenerate_single_chirp_bpsk():
    cfg = FracConfig(N=1, N_s=1, K=1, M=2, L=4)
    assert cfg.n_bits == 1
    for b in (0, 1):
        sym, x = tx_frac([b], cfg)
        assert np.allclose(x[0], sym.phases[0] * cfg.chirp)
        assert list(rx_frac(x[0], cfg, frac_dictionary(cfg, np.ones((1, 1))))) == [b]


def test_rate_and_group_order():
    cfg = FracConfig(N=8, N_s=2, K=4, M=4)
    assert cfg.n_bits == 11
    bits = np.array([0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1], dtype=np.uint8)
    sym = split_frac_bits(bits, cfg)
    assert sym.frequencies == (1, 2)   # colex rank 2 of 2-of-4
    assert sym.antennas == (0, 3)      # colex rank 3 of 2-of-8
    assert sym.order == (1, 0)
    _, x = tx_frac(bits, cfg)
    assert np.allclose(x[0], sym.phases[1] * cfg.slot_waveforms[2])
    assert np.allclose(x[3], sym.phases[0] * cfg.slot_waveforms[1])
    assert np.count_nonzero(np.abs(x).sum(axis=1)) == 2


def test_slot_waveform_definition():
    cfg = FracConfig(N=2, N_s=1, K=3, L=16)
    t = np.arange(16) / cfg.fs
    chirp = fmcw_chirp(FmcwSpec(1.0, 1.0, 1.0, 3), cfg.fs).samples
    for k in range(3):
        expect = chirp * np.exp(2j * np.pi * k * cfg.fmcw.delta_f * t)
        assert np.allclose(cfg.slot_waveforms[k], expect)
    # dechirped slots are orthogonal
    G = cfg.slot_waveforms @ cfg.slot_waveforms.conj().T
    assert np.max(np.abs(G - 16 * np.eye(3))) < 1e-9


def test_full_support_only_phase_bits():
    cfg = FracConfig(N=2, N_s=2, K=2, M=2, L=8)
    assert cfg.group_bits["frequency"] == cfg.group_bits["antenna"] == 0
    assert cfg.group_bits["permutation"] == 1


@pytest.mark.parametrize("cfg", [FracConfig(N=3, N_s=2, K=3, M=2, L=8),
                                 FracConfig(N=4, N_s=2, K=4, M=1, L=8, n_rx=2),
                                 FracConfig(N=2, N_s=1, K=2, M=4, L=8)])
def test_noiseless_exhaustive(cfg):
    link = FracLink(cfg)
    rng = RngStream(4)
    for v in range(1 << cfg.n_bits):
        bits = int_to_bits(v, cfg.n_bits)
        y, h = link.transmit(bits, rng)
        assert np.array_equal(link.decode(y, h), bits)


def test_decoder_equals_brute_force_ml_noisy():
    cfg = FracConfig(N=3, N_s=2, K=3, M=2, L=8)
    rng = RngStream(6)
    for _ in range(150):
        bits = rng.bits(cfg.n_bits)
        _, x = tx_frac(bits, cfg)
        h = rayleigh_gains(cfg.N, rng).reshape(1, cfg.N)
        y = awgn((h @ x).ravel(), 2.0, rng)
        assert np.array_equal(rx_frac(y, cfg, frac_dictionary(cfg, h)), frac_ml_oracle(y, cfg, h))


def test_support_equals_least_squares_oracle_noiseless():
    cfg = FracConfig(N=4, N_s=2, K=4, M=4, L=8, n_rx=2)
    rng = RngStream(9)
    for _ in range(20):
        bits = rng.bits(cfg.n_bits)
        sym, x = tx_frac(bits, cfg)
        h = rayleigh_gains(cfg.n_rx * cfg.N, rng).reshape(cfg.n_rx, cfg.N)
        Phi = frac_dictionary(cfg, h)
        y = (h @ x).ravel()
        support = sorted(a * cfg.K + s for a, (s, _) in sym.element_slots().items())
        assert list(ls_support_oracle(y, Phi, 2)) == support
        assert np.array_equal(rx_frac(y, cfg, Phi), bits)


def test_dictionary_columns():
    cfg = FracConfig(N=3, N_s=1, K=2, L=8, n_rx=2)
    h = RngStream(1).complex_normal((2, 3))
    Phi = frac_dictionary(cfg, h)
    assert Phi.shape == (16, 6)
    col = Phi[:, 2 * cfg.K + 1].reshape(2, 8)
    assert np.allclose(col, np.outer(h[:, 2], cfg.slot_waveforms[1]))
    with pytest.raises(CodebookError):
        rx_frac(np.zeros(16), cfg, Phi[:, :5])


def test_ber_index_improves_with_snr():
    link = FracLink(FracConfig(N=4, N_s=2, K=4, M=2, L=16))
    res = monte_carlo_ber(link, [-5.0, 0.0, 5.0], 1500, seed=3)
    for a, b in zip(res, res[1:]):
        assert b.ber_index <= a.ber_index + a.ci


def test_frac_config_validation():
    with pytest.raises(CodebookError):
        FracConfig(N=2, N_s=3, K=4)
    with pytest.raises(WaveformError):
        FracConfig(N=2, N_s=1, K=4, kappa=0.3)
    with pytest.raises(WaveformError):
        FracConfig(N=2, N_s=1, K=8, L=4)
    with pytest.raises(CodebookError):
        tx_frac([0, 1], FracConfig(N=2, N_s=1, K=2, L=8))


# -- frequency hopping ------------------------------------------------------

def test_fh_rate():
    assert FhConfig(N=2, K=3, H=2).n_bits == 8


def test_fh_zero_phase_bits_give_zeta():
    cfg = FhConfig(N=3, K=4, H=2, theta_r=0.4)
    hops = fh_hop_symbols(np.zeros(cfg.n_bits, dtype=np.uint8), cfg)
    zeta = np.arange(3) * np.pi / 3 - np.angle(steering(cfg.geometry, 0.4))
    for hop in hops:
        assert np.allclose(hop.theta, zeta)


def test_fh_noiseless_exhaustive():
    cfg = FhConfig(N=2, K=3, H=2)
    for v in range(1 << cfg.n_bits):
        bits = int_to_bits(v, cfg.n_bits)
        hops, x = tx_fh(bits, cfg)
        assert all(len(set(h.codes)) == cfg.N for h in hops)
        assert np.array_equal(rx_fh(x, cfg), bits)


def test_fh_hops_decode_independently():
    cfg = FhConfig(N=3, K=5, H=3)
    one = FhConfig(N=3, K=5, H=1)
    bits = RngStream(2).bits(cfg.n_bits)
    _, x = tx_fh(bits, cfg)
    per = np.concatenate([rx_fh(x[:, h * 16:(h + 1) * 16], one) for h in range(3)])
    assert np.array_equal(rx_fh(x, cfg), per)


def test_fh_hops_disjoint_support():
    cfg = FhConfig(N=2, K=3, H=3)
    _, x = tx_fh(RngStream(5).bits(cfg.n_bits), cfg)
    segs = [np.where((np.arange(48) // 16) == h, x[0], 0) for h in range(3)]
    for a, b in itertools.combinations(segs, 2):
        assert abs(np.vdot(a, b)) < 1e-9


def test_fh_phase_bit_isolation():
    cfg = FhConfig(N=3, K=4, H=2)
    bits = RngStream(7).bits(cfg.n_bits)
    flipped = bits.copy()
    flipped[1] ^= 1
    _, x = tx_fh(flipped, cfg)
    out = rx_fh(x, cfg)
    assert np.count_nonzero(out != bits) == 1 and out[1] != bits[1]


def test_fh_known_gains():
    cfg = FhConfig(N=2, K=3, H=2)
    bits = RngStream(8).bits(cfg.n_bits)
    _, x = tx_fh(bits, cfg)
    g = np.array([0.5 - 1j, -2.0 + 0.1j])
    assert np.array_equal(rx_fh(g[:, None] * x, cfg, gains=g), bits)


def test_fh_validation():
    with pytest.raises(CodebookError):
        FhConfig(N=4, K=3, H=1)
    with pytest.raises(CodebookError):
        tx_fh([0] * 3, FhConfig(N=2, K=3, H=2))
