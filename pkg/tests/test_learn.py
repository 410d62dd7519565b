import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmst_tbcc.bmst import BmstConfig
from bmst_tbcc.channel import ChannelModel
from bmst_tbcc.learn import (REFERENCE_SNRS, REFERENCE_THRESHOLDS, MetricSample, Policy, ThresholdTable,
                             choose_threshold, collect_samples, learn_table)
from bmst_tbcc.tbcc import DEFAULT_GENERATORS, TbccCode


@pytest.fixture(scope="module")
def cfg32():
    return BmstConfig(TbccCode(DEFAULT_GENERATORS, 32), 49, 1)


@pytest.fixture(scope="module")
def samples_3db(cfg32):
    return collect_samples(cfg32, ChannelModel.from_snr_db(3.0), 400, np.random.default_rng(30))


def samples(values, correct):
    return [MetricSample(v, c, 3.0, 1) for v, c in zip(values, correct)]


def test_policy_parse():
    assert Policy.parse("quantile") == Policy("quantile", 0.99)
    assert Policy.parse("midpoint:0.9") == Policy("midpoint", 0.9)
    assert str(Policy.parse("accept:0.5")) == "accept:0.5"
    for bad in ("median", "quantile:1.5"):
        with pytest.raises(ValueError):
            Policy.parse(bad)


def test_noiseless_rank_one_is_correct(cfg32):
    s = collect_samples(cfg32, ChannelModel.from_snr_db(3.0), 5, np.random.default_rng(1),
                        l_max=4, noiseless=True)
    assert len(s) == 20
    assert all(x.correct for x in s if x.rank == 1)
    assert not any(x.correct for x in s if x.rank > 1)


def test_sample_count_bookkeeping():
    cfg = BmstConfig(TbccCode(DEFAULT_GENERATORS, 5), 2, 1)
    s = collect_samples(cfg, ChannelModel(0.8), 3, np.random.default_rng(2), l_max=64)
    assert len(s) == 3 * 32  # the k=5 code has only 32 codewords
    assert [x.rank for x in s[:32]] == list(range(1, 33))
    with pytest.raises(ValueError):
        collect_samples(cfg, ChannelModel(0.8), 0, np.random.default_rng(2))


def test_correct_mean_exceeds_erroneous_mean(samples_3db):
    good = [s.m_value for s in samples_3db if s.correct]
    bad = [s.m_value for s in samples_3db if not s.correct]
    assert len(good) > 350
    assert np.mean(good) > np.mean(bad)
    assert np.median(good) > 1.2 > np.median(bad)


def test_midpoint_on_separated_samples():
    s = samples([0.1, 0.4, 0.7, 1.3, 1.5], [False, False, False, True, True])
    T = choose_threshold(s, "midpoint")
    assert 0.7 < T < 1.3


def test_single_label_rejected():
    with pytest.raises(ValueError):
        choose_threshold(samples([1.0, 2.0], [True, True]), "quantile:0.9")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=40), st.floats(0, 1), st.floats(0, 1))
def test_quantile_policy_monotone_in_level(values, a1, a2):
    s = samples(values + [2.0], [False] * len(values) + [True])
    lo, hi = sorted((a1, a2))
    assert choose_threshold(s, Policy("quantile", lo)) <= choose_threshold(s, Policy("quantile", hi))


def test_top_of_erroneous_scores_near_published_threshold(samples_3db):
    # the published 3 dB example threshold sits at the upper end of the
    # erroneous-candidate scores
    T = choose_threshold(samples_3db, "quantile:1")
    assert 1.0 <= T <= 1.4


@pytest.mark.xfail(strict=True, reason="measured 0.99-quantile of erroneous scores at 3 dB is "
                                       "about 0.86; the published T=1.2 is the extreme tail")
def test_erroneous_99_quantile_near_published_threshold(samples_3db):
    T = choose_threshold(samples_3db, "quantile:0.99")
    assert abs(T - 1.2) <= 0.2


def test_learned_ladder_tracks_published_set_a(cfg32):
    table = learn_table(cfg32, REFERENCE_SNRS, 200, "accept:0.5", seed=3)
    learned = [table.lookup(s, 32, 64) for s in REFERENCE_SNRS]
    assert all(a <= b for a, b in zip(learned, learned[1:]))
    assert np.allclose(learned, REFERENCE_THRESHOLDS["A"], atol=0.15)


def test_table_round_trip(tmp_path):
    t = ThresholdTable()
    t.set(2.0, 32, 64, 1.3, "accept:0.5")
    t.set(3.5, 32, 64, 1.1 / 3, Policy("quantile", 0.99))
    p = tmp_path / "t.csv"
    t.write(p)
    back = ThresholdTable.read(p)
    assert back.lookup(3.5, 32, 64) == 1.1 / 3
    assert back.policy(2.0, 32, 64) == "accept:0.5"
    assert list(back.rows()) == list(t.rows())
    p2 = tmp_path / "t2.csv"
    back.write(p2)
    assert p.read_bytes() == p2.read_bytes()
    assert p.read_text().splitlines()[0] == "snr_db,k,l_max,threshold,policy"
    with pytest.raises(KeyError):
        back.lookup(2.5, 32, 64)
