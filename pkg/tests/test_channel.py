import math
import time

import numpy as np
import pytest
from scipy import integrate

from bmst_tbcc.channel import (ChannelModel, awgn, bpsk, reference_stats, sigma_to_snr,
                               snr_to_sigma, symbol_density)


def test_bpsk_map():
    assert list(bpsk([0, 0])) == [1.0, 1.0]
    assert list(bpsk([1, 0, 1])) == [-1.0, 1.0, -1.0]


def test_bpsk_homomorphism(rng):
    a, b = rng.integers(0, 2, (2, 100))
    assert np.array_equal(bpsk(a ^ b), bpsk(a) * bpsk(b))


def test_snr_mapping():
    assert snr_to_sigma(0.0) == 1.0
    assert snr_to_sigma(4.0) ** 2 == pytest.approx(10 ** -0.4)
    assert snr_to_sigma(4.0) ** 2 == pytest.approx(0.3981, abs=1e-4)
    for x in (-3.0, 0.5, 2.0, 7.25):
        assert sigma_to_snr(snr_to_sigma(x)) == pytest.approx(x)
    assert ChannelModel.from_snr_db(2.5).snr_db == pytest.approx(2.5)


def test_model_rejects_bad_sigma():
    for s in (0.0, -1.0, math.inf):
        with pytest.raises(ValueError):
            ChannelModel(s)


def test_awgn_tiny_noise():
    x = bpsk([0, 1, 1, 0])
    y = awgn(x, ChannelModel(1e-12), np.random.default_rng(0))
    assert np.allclose(y, x, atol=1e-9)


def test_awgn_moments():
    model = ChannelModel(0.631)
    x = bpsk(np.random.default_rng(1).integers(0, 2, 100_000))
    noise = awgn(x, model, np.random.default_rng(2)) - x
    assert abs(noise.mean()) <= 0.02
    assert noise.var() == pytest.approx(model.variance, rel=0.05)


def test_awgn_deterministic():
    x = bpsk(np.zeros(32))
    m = ChannelModel(0.8)
    assert np.array_equal(awgn(x, m, np.random.default_rng(5)), awgn(x, m, np.random.default_rng(5)))


def test_symbol_density_values_and_symmetry():
    m1 = ChannelModel(1.0)
    assert symbol_density(1.0, 0, m1) == pytest.approx((2 * math.pi) ** -0.5)
    m = ChannelModel(0.7)
    ys = np.linspace(-4, 4, 41)
    assert np.allclose(symbol_density(ys, 0, m), symbol_density(-ys, 1, m))
    assert symbol_density(0.0, 0, m) == pytest.approx(symbol_density(0.0, 1, m))


@pytest.mark.parametrize("bit", [0, 1])
def test_symbol_density_normalised(bit):
    m = ChannelModel(0.5)
    total, _ = integrate.quad(lambda y: symbol_density(y, bit, m), -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_mutual_information_anchor():
    t0 = time.perf_counter()
    mi, d_rand = reference_stats(ChannelModel.from_snr_db(4.0))
    assert time.perf_counter() - t0 < 1.0
    assert mi == pytest.approx(0.79, abs=0.01)
    assert d_rand < 0 < mi


def test_mutual_information_limits_and_monotonicity():
    snrs = np.arange(-10.0, 10.5, 1.0)
    stats = [reference_stats(ChannelModel.from_snr_db(s)) for s in snrs]
    mis = np.array([s[0] for s in stats])
    assert np.all(np.diff(mis) > 0)
    assert all(s[1] <= 0 for s in stats)
    assert reference_stats(ChannelModel(100.0))[0] < 1e-3


def test_mutual_information_against_monte_carlo():
    # independent estimate: sample mean of log2 f(y|x)/f(y) for transmitted x
    model = ChannelModel.from_snr_db(2.0)
    rng = np.random.default_rng(3)
    x = rng.integers(0, 2, 400_000)
    y = awgn(bpsk(x), model, rng)
    f0, f1 = symbol_density(y, 0, model), symbol_density(y, 1, model)
    fx = np.where(x == 0, f0, f1)
    est = np.mean(np.log2(fx / (0.5 * f0 + 0.5 * f1)))
    rand = np.mean(0.5 * np.log2(f0 / (0.5 * f0 + 0.5 * f1)) + 0.5 * np.log2(f1 / (0.5 * f0 + 0.5 * f1)))
    mi, d_rand = reference_stats(model)
    assert est == pytest.approx(mi, abs=0.005)
    assert rand == pytest.approx(d_rand, abs=0.01)
