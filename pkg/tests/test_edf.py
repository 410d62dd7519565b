import math

import numpy as np
import pytest
from oracles import brute_codebook

from bmst_tbcc import _kernels as K
from bmst_tbcc.bmst import BmstConfig
from bmst_tbcc.channel import ChannelModel, awgn, bpsk, reference_stats, symbol_density
from bmst_tbcc.edf import edf, flip, soft_metric
from bmst_tbcc.gf2 import random_matrix, vec_add, vec_mat_mul
from bmst_tbcc.slva import SlvaSession, viterbi
from bmst_tbcc.tbcc import DEFAULT_GENERATORS, TbccCode, encode


def edf_direct(x, y, model):
    """Straight from the definition with explicit densities."""
    fx = np.array([symbol_density(yi, xi, model) for xi, yi in zip(x, y)])
    fy = 0.5 * symbol_density(y, 0, model) + 0.5 * symbol_density(y, 1, model)
    return float(np.sum(np.log2(fx / fy)) / len(y))


def test_edf_zero_observation():
    m = ChannelModel(0.9)
    for x in ([0, 0, 0, 0], [1, 0, 1, 1]):
        assert edf(x, np.zeros(4), m) == 0.0


def test_edf_single_symbol_closed_form():
    m = ChannelModel(math.sqrt(0.3981))
    expected = math.log2(2 / (1 + math.exp(-2 / 0.3981)))
    assert edf([0], [1.0], m) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.991, abs=1e-3)


def test_edf_matches_definition(rng):
    m = ChannelModel(0.75)
    for _ in range(20):
        x = rng.integers(0, 2, 12)
        y = rng.normal(0, 1.5, 12)
        assert edf(x, y, m) == pytest.approx(edf_direct(x, y, m), abs=1e-12)


def test_edf_stable_at_low_noise():
    m = ChannelModel(1e-3)
    assert edf([0, 1], [1.0, -1.0], m) == pytest.approx(1.0)
    assert np.isfinite(edf([1, 1], [1.0, 1.0], m))


def test_edf_depends_on_sign_pattern_only(rng):
    m = ChannelModel(0.8)
    for _ in range(50):
        x = rng.integers(0, 2, 20)
        y = rng.normal(size=20)
        assert edf(x, y, m) == edf(np.zeros(20, np.uint8), bpsk(x) * y, m)


def test_edf_transmitted_word_near_mutual_information():
    model = ChannelModel.from_snr_db(4.0)
    rng = np.random.default_rng(4)
    vals = []
    for _ in range(10_000):
        x = rng.integers(0, 2, 64)
        vals.append(edf(x, awgn(bpsk(x), model, rng), model))
    assert np.mean(vals) == pytest.approx(0.79, abs=0.02)
    assert np.mean(vals) == pytest.approx(reference_stats(model)[0], abs=0.01)


def test_edf_length_mismatch():
    with pytest.raises(ValueError):
        edf([0, 1], [0.1], ChannelModel(1.0))


def test_flip():
    y = np.array([0.5, -1.2])
    assert list(flip(y, [1, 0])) == [-0.5, -1.2]
    z = np.random.default_rng(0).normal(size=9)
    c = np.random.default_rng(1).integers(0, 2, 9)
    assert np.array_equal(flip(z, np.zeros(9, np.uint8)), z)
    assert np.array_equal(flip(flip(z, c), c), z)
    with pytest.raises(ValueError):
        flip(z, [1, 0])


def test_viterbi_maximises_edf(trellis8, rng):
    _, C = brute_codebook(8, DEFAULT_GENERATORS)
    m = ChannelModel.from_snr_db(1.0)
    for _ in range(50):
        y = bpsk(C[rng.integers(256)]) + rng.normal(0, m.sigma, 16)
        best = max(edf(c, y, m) for c in C)
        assert edf(viterbi(y, trellis8).codeword, y, m) == pytest.approx(best, abs=1e-12)


def _two_frames(code, R, rng):
    u0, u1 = rng.integers(0, 2, (2, code.k))
    v0, v1 = encode(code, u0), encode(code, u1)
    return v0, v1, v0, vec_add(v1, vec_mat_mul(v0, R))


def test_soft_metric_noiseless_limit(code32, trellis32, rng):
    R = random_matrix(64, 5)
    v0, _, c0, c1 = _two_frames(code32, R, rng)
    sm = soft_metric(v0, bpsk(c0), bpsk(c1), R, trellis32, ChannelModel(0.05))
    assert sm.own == pytest.approx(1.0) and sm.next == pytest.approx(1.0)
    assert sm.value == pytest.approx(2.0)
    assert sm.value == sm.own + sm.next


def test_soft_metric_kernel_agrees(code32, trellis32, rng):
    R = random_matrix(64, 6)
    model = ChannelModel.from_snr_db(3.0)
    for _ in range(10):
        _, _, c0, c1 = _two_frames(code32, R, rng)
        y0, y1 = awgn(bpsk(c0), model, rng), awgn(bpsk(c1), model, rng)
        session = SlvaSession(y0, trellis32)
        for _ in range(5):
            cand = session.next()
            ref = soft_metric(cand, y0, y1, R, trellis32, model)
            own, nxt, w = K.score_candidate(cand.packed, y0, y1, R.entries, trellis32.out_bits,
                                            trellis32.next_state, trellis32.out_label, 4, 32,
                                            1 / model.variance)
            assert own == pytest.approx(ref.own, abs=1e-12)
            assert nxt == pytest.approx(ref.next, abs=1e-12)
            assert np.array_equal(w, vec_mat_mul(cand.codeword, R))


def test_soft_metric_separates_correct_from_wrong(code32, trellis32):
    """Correct candidates score high; the next-frame EDF of a wrong
    candidate sits between the random-word mean and the mutual information."""
    rng = np.random.default_rng(8)
    R = random_matrix(64, 7)
    model = ChannelModel.from_snr_db(3.0)
    mi, d_rand = reference_stats(model)
    right, wrong, wrong_next = [], [], []
    for _ in range(300):
        v0, _, c0, c1 = _two_frames(code32, R, rng)
        y0, y1 = awgn(bpsk(c0), model, rng), awgn(bpsk(c1), model, rng)
        right.append(soft_metric(v0, y0, y1, R, trellis32, model).value)
        other = encode(code32, rng.integers(0, 2, 32))
        sm = soft_metric(other, y0, y1, R, trellis32, model)
        wrong.append(sm.value)
        wrong_next.append(sm.next)
    right, wrong = np.array(right), np.array(wrong)
    assert np.median(right) > 1.2 > np.median(wrong)
    assert d_rand < np.mean(wrong_next) < mi


def test_soft_metric_length_check(trellis32):
    R = random_matrix(64, 1)
    with pytest.raises(ValueError):
        soft_metric(np.zeros(64, np.uint8), np.zeros(63), np.zeros(64), R, trellis32, ChannelModel(1.0))
