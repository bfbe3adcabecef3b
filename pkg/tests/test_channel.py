import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mirage._bits import bits_to_bytes, bytes_to_bits, crc32_bits
from mirage.channel import (
    ChannelConfig,
    ReliabilityConfig,
    arq_transmit,
    block_error_rate,
    crc_ok_batch,
    erfc,
    expected_arq_bits,
    flip_positions,
    link_budget,
    optimal_segment_bytes,
    transmission_latency,
    transmit_bits,
    undetected_error_bound,
)
from mirage.errors import DegenerateChannelError, ReliabilityConfigError, ReliabilityExhaustedError

from oracles import FROZEN, crc32_bitwise


@pytest.mark.parametrize("ref", FROZEN["link"], ids=lambda r: f"{r['snr_db']}dB")
def test_link_budget_matches_high_precision(ref):
    lb = link_budget(ChannelConfig(ref["snr_db"], 20e6))
    assert lb.snr_linear == pytest.approx(ref["snr_linear"], rel=1e-14)
    assert lb.spectral_efficiency == pytest.approx(ref["eta"], rel=1e-13)
    assert lb.throughput_bps == pytest.approx(ref["throughput_bps"], rel=1e-13)
    assert lb.eb_n0 == pytest.approx(ref["eb_n0"], rel=1e-13)
    assert lb.ber == pytest.approx(ref["ber"], rel=1e-9)


def test_zero_db_is_unit_efficiency():
    lb = link_budget(ChannelConfig(0.0, 1e6))
    assert lb.spectral_efficiency == 1.0
    assert lb.throughput_bps == 1e6


def test_ber_stays_a_probability_at_extremes():
    assert link_budget(ChannelConfig(60.0, 1e6)).ber == 0.0
    assert 0 < link_budget(ChannelConfig(-30.0, 1e6)).ber <= 0.5


def test_degenerate_channel():
    with pytest.raises(DegenerateChannelError):
        link_budget(ChannelConfig(-4000.0, 1e6))


@pytest.mark.parametrize("kwargs", [
    dict(snr_db=math.nan, bandwidth_hz=1.0),
    dict(snr_db=0.0, bandwidth_hz=0.0),
    dict(snr_db=0.0, bandwidth_hz=1.0, fixed_overhead_s=-1.0),
    dict(snr_db=0.0, bandwidth_hz=1.0, seed=-1),
])
def test_channel_config_validation(kwargs):
    with pytest.raises(ValueError):
        ChannelConfig(**kwargs)


def test_erfc_against_frozen_grid():
    g = FROZEN["erfc_grid"]
    got = erfc(np.array(g["x"]))
    assert np.max(np.abs(got - np.array(g["erfc"]))) <= 1e-10


def test_erfc_agrees_with_stdlib():
    xs = np.linspace(-8, 30, 2001)
    ref = np.array([math.erfc(x) for x in xs])
    np.testing.assert_allclose(erfc(xs), ref, rtol=1e-12, atol=1e-300)
    assert erfc(1.0) == pytest.approx(0.15729920705028513, abs=1e-15)
    assert erfc(0.0) == 1.0


def test_erfc_scalar_returns_float():
    assert isinstance(erfc(0.5), float)


def test_block_error_rate():
    assert block_error_rate(1e-3, 1000) == pytest.approx(FROZEN["bler_1e-3_1000"], rel=1e-12)
    assert block_error_rate(0.0, 50) == 0.0
    assert block_error_rate(1.0, 3) == 1.0
    # tiny ber: no cancellation
    assert block_error_rate(1e-18, 8) == pytest.approx(8e-18, rel=1e-9)
    with pytest.raises(ValueError):
        block_error_rate(0.1, 0)


def test_transmission_latency_examples():
    cfg = ChannelConfig(0.0, 1e6)
    lb = link_budget(cfg)
    assert transmission_latency(10**6, 1, lb, cfg) == pytest.approx(1.0)
    cfg0 = ChannelConfig(0.0, 1e6, fixed_overhead_s=0.25)
    assert transmission_latency(0, 1, lb, cfg0) == 0.25
    cfg10 = ChannelConfig(-10.0, 20e6)
    assert transmission_latency(2048, 1, link_budget(cfg10), cfg10) == pytest.approx(
        FROZEN["latency_2048_m10"], rel=1e-12)


@given(a=st.integers(0, 10**7), b=st.integers(0, 10**7), t0=st.floats(0, 5))
def test_latency_is_additive(a, b, t0):
    cfg = ChannelConfig(3.0, 5e6, t0)
    lb = link_budget(cfg)
    lhs = transmission_latency(a + b, 1, lb, cfg)
    rhs = transmission_latency(a, 1, lb, cfg) + transmission_latency(b, 1, lb, cfg) - t0
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_flip_extremes():
    bits = np.ones(100, dtype=np.uint8)
    assert np.array_equal(transmit_bits(bits, 0.0, 1), bits)
    assert not transmit_bits(bits, 1.0, 1).any()


def test_flips_are_seeded():
    bits = np.zeros(10_000, dtype=np.uint8)
    assert np.array_equal(transmit_bits(bits, 0.05, 9), transmit_bits(bits, 0.05, 9))
    assert not np.array_equal(transmit_bits(bits, 0.05, 9), transmit_bits(bits, 0.05, 10))


def test_flip_gaps_look_geometric():
    # successive flip gaps of an iid process: mean 1/p, var (1-p)/p^2
    p = 0.02
    pos = flip_positions(2_000_000, p, np.random.default_rng(5))
    gaps = np.diff(pos)
    assert gaps.mean() == pytest.approx(1 / p, rel=0.02)
    assert gaps.var() == pytest.approx((1 - p) / p**2, rel=0.05)
    assert np.all(gaps >= 1)


@pytest.mark.parametrize("n", [1, 7, 64, 1032])
def test_crc_bits_match_bitwise_oracle(n, rng):
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    want = crc32_bitwise(bits_to_bytes(bits))
    got = int("".join(map(str, crc32_bits(bits))), 2)
    assert got == want


def test_crc_batch_verification(rng):
    n = 77
    payload = rng.integers(0, 2, (20, n), dtype=np.uint8)
    blocks = np.stack([np.concatenate([p, crc32_bits(p)]) for p in payload])
    assert crc_ok_batch(blocks, n).all()
    for j in range(blocks.shape[1]):
        bad = blocks[:1].copy()
        bad[0, j] ^= 1
        assert not crc_ok_batch(bad, n)[0]


def test_expected_arq_bits_matches_mean_attempts():
    # one 1000-bit segment plus CRC32: mean attempts 1 / (1 - BLER(1032))
    exp = expected_arq_bits(1000, 1e-3, 125)
    assert exp / 1032 == pytest.approx(FROZEN["arq_mean_1032"], rel=1e-12)


def test_optimal_segment_is_a_minimum():
    for ber in (1e-4, 1e-2, 0.1):
        s = optimal_segment_bytes(4000, ber)
        best = expected_arq_bits(4000, ber, s)
        for other in range(1, 501):
            assert best <= expected_arq_bits(4000, ber, other) + 1e-9


def test_arq_zero_ber_single_pass(rng):
    bits = rng.integers(0, 2, 800, dtype=np.uint8)
    res = arq_transmit(bits, 0.0, ReliabilityConfig(), 1)
    assert res.success and res.attempts == 1 and res.segments == 1
    assert res.bits_sent == 832
    assert np.array_equal(res.delivered, bits)


@pytest.mark.parametrize("ber", [1e-3, 1e-2, 0.1])
def test_arq_delivers_exactly(ber, rng):
    bits = rng.integers(0, 2, 4000, dtype=np.uint8)
    res = arq_transmit(bits, ber, ReliabilityConfig(), 3)
    assert np.array_equal(res.delivered, bits)
    assert res.attempts >= res.segments


def test_arq_mean_attempts_whole_block():
    # whole-block ARQ: the attempt count is geometric with success 1 - BLER(1032)
    rel = ReliabilityConfig(segment_bytes=125)
    bits = np.zeros(1000, dtype=np.uint8)
    rng = np.random.default_rng(8)
    counts = [arq_transmit(bits, 1e-3, rel, rng).attempts for _ in range(3000)]
    mean = FROZEN["arq_mean_1032"]
    sd = math.sqrt((mean - 1) * mean / 3000)  # var of geometric = (1-p)/p^2
    assert abs(np.mean(counts) - mean) < 4 * sd


def test_arq_exhausts_when_segments_cannot_get_through():
    # at ber 0.2 even a one-byte segment succeeds with p = 0.8**40 ~ 1.3e-4
    with pytest.raises(ReliabilityExhaustedError):
        arq_transmit(np.zeros(400, dtype=np.uint8), 0.2, ReliabilityConfig(), 0)


def test_arq_exhaustion():
    rel = ReliabilityConfig(max_attempts=3, segment_bytes=64)
    with pytest.raises(ReliabilityExhaustedError) as info:
        arq_transmit(np.zeros(512, dtype=np.uint8), 0.3, rel, 0)
    assert info.value.attempts == 3


def test_epsilon_check():
    with pytest.raises(ReliabilityConfigError):
        ReliabilityConfig(epsilon=0.0)
    # a 2^-32 residual can never meet an epsilon below it at BER 0.5
    with pytest.raises(ReliabilityConfigError):
        arq_transmit(np.zeros(64, dtype=np.uint8), 0.5, ReliabilityConfig(epsilon=1e-12), 0)
    assert undetected_error_bound(0.1, 40) < 1e-6


@settings(max_examples=40, deadline=None)
@given(data=st.binary(min_size=1, max_size=300), ber=st.sampled_from([0.0, 1e-3, 0.05]),
       seed=st.integers(0, 2**32))
def test_arq_round_trip_property(data, ber, seed):
    bits = bytes_to_bits(data)
    res = arq_transmit(bits, ber, ReliabilityConfig(), seed)
    assert bits_to_bytes(res.delivered) == data
