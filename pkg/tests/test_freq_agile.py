import itertools

import numpy as np
import pytest

from imisac.channel import RngStream, awgn
from imisac.codebook import CodebookError, int_to_bits
from imisac.freq_agile import (FreqAgileConfig, array_weights, assignment_from_rank,
                               rx_freq_agile, slot_correlations, tx_grouped, tx_majorcom)

TH = np.deg2rad(30.0)


def _tx(bits, cfg):
    return (tx_majorcom if cfg.G is None else tx_grouped)(bits, cfg, TH)


def test_single_element_two_slots():
    cfg = FreqAgileConfig(N=1, K=2)
    assert cfg.n_bits == 1
    assert _tx([0], cfg)[0].slots == (0,)
    assert _tx([1], cfg)[0].slots == (1,)


def test_two_of_three_bits():
    assert FreqAgileConfig(N=2, K=3).n_bits == 2


def test_broadside_weights_are_one():
    cfg = FreqAgileConfig(N=4, K=6)
    assert np.allclose(array_weights([0, 3, 5, 1], cfg, 0.0), 1)


def test_weights_formula():
    cfg = FreqAgileConfig(N=3, K=4, T=1e-6)
    slots = [2, 0, 3]
    f = cfg.f_c + np.array(slots) / cfg.T
    expect = np.exp(2j * np.pi * np.arange(3) * f * (cfg.geometry.d / 299_792_458.0) * np.sin(TH))
    assert np.allclose(array_weights(slots, cfg, TH), expect)


def test_tones_orthogonal():
    cfg = FreqAgileConfig(N=2, K=5, L=16)
    G = cfg.tones @ cfg.tones.conj().T / cfg.L
    assert np.max(np.abs(G - np.eye(5))) < 1e-12


def test_single_group_collapse():
    cfg = FreqAgileConfig(N=4, K=5, G=1)
    assert cfg.n_bits == 2
    a, x = _tx([1, 0], cfg)
    assert len(set(a.slots)) == 1


@pytest.mark.parametrize("cfg", [
    FreqAgileConfig(N=2, K=3), FreqAgileConfig(N=3, K=4), FreqAgileConfig(N=3, K=3, reuse=True),
    FreqAgileConfig(N=2, K=4, G=2), FreqAgileConfig(N=4, K=4, G=2), FreqAgileConfig(N=3, K=4, G=3),
    FreqAgileConfig(N=2, K=2),
])
def test_noiseless_exhaustive(cfg):
    for v in range(1 << cfg.n_bits):
        bits = int_to_bits(v, cfg.n_bits)
        a, x = _tx(bits, cfg)
        if cfg.G is None and not cfg.reuse:
            assert len(set(a.slots)) == cfg.N
        if cfg.G is not None:
            assert sorted(np.bincount(a.groups)) == [cfg.N // cfg.G] * cfg.G
        assert np.array_equal(rx_freq_agile(x, cfg), bits)


def test_grouped_pattern_count():
    assert FreqAgileConfig(N=4, K=4, G=2).pattern_count == 36
    assert FreqAgileConfig(N=4, K=4, G=2).n_bits == 5


def test_single_tone_detection_20db():
    cfg = FreqAgileConfig(N=1, K=4, L=32)
    rng = RngStream(20)
    ok = 0
    trials = 10**4
    k = rng.integers(4, trials)
    for t in range(trials):
        x = cfg.tones[k[t]]
        y = awgn(x, 10 ** (-20 / 10), rng)
        ok += int(np.argmax(np.abs(slot_correlations(y, cfg.tones))[0])) == k[t]
    assert ok / trials >= 0.99


def test_invalid_configs():
    with pytest.raises(CodebookError):
        FreqAgileConfig(N=5, K=4)
    with pytest.raises(CodebookError):
        FreqAgileConfig(N=5, K=4, G=2)
    with pytest.raises(CodebookError):
        tx_majorcom([0, 1, 0], FreqAgileConfig(N=2, K=3), TH)


def test_fallback_on_invalid_detection():
    cfg = FreqAgileConfig(N=2, K=3)
    # both streams strongest on slot 2: not a distinct assignment
    y = np.vstack([cfg.tones[2] + 0.5 * cfg.tones[0], cfg.tones[2] + 0.4 * cfg.tones[1]])
    bits = rx_freq_agile(y, cfg)
    scores = np.abs(slot_correlations(y, cfg.tones)) ** 2
    # brute force over the 4 codewords (of 6 ordered slot pairs); ties go to the lower rank
    slots = [assignment_from_rank(i, cfg).slots for i in range(4)]
    assert set(slots) < set(itertools.permutations(range(3), 2))
    best = max(range(4), key=lambda i: (scores[0, slots[i][0]] + scores[1, slots[i][1]], -i))
    assert np.array_equal(bits, int_to_bits(best, 2))
