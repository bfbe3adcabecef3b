"""AWGN link model: capacity, BPSK bit error rate, a Monte Carlo bit-flip
channel and a CRC32 stop-and-wait ARQ layer for small, loss-intolerant
payloads such as compressed captions.

The analytic quantities follow the usual chain::

    snr      = 10 ** (snr_db / 10)
    T        = b * log2(1 + snr)              # Shannon throughput, bits/s
    eta      = T / b                          # spectral efficiency
    Eb/N0    = snr / eta
    BER      = 0.5 * erfc(sqrt(Eb/N0))

Keyframe codes ride the raw bit-flip channel; captions go through
:func:`arq_transmit`, which retransmits CRC-protected segments until they
verify.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ._bits import crc32, crc32_bits
from .errors import (
    DegenerateChannelError,
    ReliabilityConfigError,
    ReliabilityExhaustedError,
)

_SQRT_PI = math.sqrt(math.pi)
CRC_BITS = 32


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float
    bandwidth_hz: float
    fixed_overhead_s: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")
        if not self.fixed_overhead_s >= 0:
            raise ValueError("fixed_overhead_s must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class LinkBudget:
    snr_linear: float
    throughput_bps: float
    spectral_efficiency: float
    eb_n0: float
    ber: float


@dataclass(frozen=True)
class ReliabilityConfig:
    """ARQ settings for the caption stream.

    ``segment_bytes=None`` lets :func:`arq_transmit` choose the segment size
    that minimises the expected number of transmitted bits at the link BER.
    Set it to at least the payload size to get whole-block ARQ.
    """

    epsilon: float = 1e-6
    max_attempts: int = 1000
    crc_bits: int = CRC_BITS
    segment_bytes: int | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ReliabilityConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.max_attempts < 1:
            raise ReliabilityConfigError("max_attempts must be >= 1")
        if self.crc_bits != CRC_BITS:
            raise ReliabilityConfigError("only CRC32 is supported")
        if self.segment_bytes is not None and self.segment_bytes < 1:
            raise ReliabilityConfigError("segment_bytes must be >= 1")


# ---------------------------------------------------------------------------
# erfc


def _erfc_scalar(x: float) -> float:
    if x < 0:
        return 2.0 - _erfc_scalar(-x)
    if x < 2.5:
        # erf(x) = 2/sqrt(pi) * exp(-x^2) * sum 2^n x^(2n+1) / (2n+1)!!
        # All terms are positive, so there is no cancellation.
        x2 = x * x
        term = x
        total = x
        n = 0
        while term > 1e-17 * total:
            n += 1
            term *= 2.0 * x2 / (2 * n + 1)
            total += term
        return 1.0 - 2.0 / _SQRT_PI * math.exp(-x2) * total
    if x > 27.0:
        return 0.0
    # Continued fraction, modified Lentz:
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tiny = 1e-300
    f = x
    c = x
    d = 0.0
    for k in range(1, 200):
        a = 0.5 * k
        d = x + a * d
        d = tiny if d == 0 else d
        c = x + a / c
        c = tiny if c == 0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(-x * x) / (_SQRT_PI * f)


def erfc(x):
    """Complementary error function for a scalar or array argument."""
    if np.ndim(x) == 0:
        return _erfc_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    return np.fromiter((_erfc_scalar(v) for v in arr.ravel()), float, arr.size).reshape(arr.shape)


# ---------------------------------------------------------------------------
# Analytic link


def link_budget(cfg: ChannelConfig) -> LinkBudget:
    snr = 10.0 ** (cfg.snr_db / 10.0)
    eta = math.log1p(snr) / math.log(2.0)
    if not eta > 0:
        raise DegenerateChannelError(
            f"snr_db={cfg.snr_db} gives zero spectral efficiency; the channel carries no bits"
        )
    eb_n0 = snr / eta
    ber = 0.5 * erfc(math.sqrt(eb_n0))
    return LinkBudget(
        snr_linear=snr,
        throughput_bps=cfg.bandwidth_hz * eta,
        spectral_efficiency=eta,
        eb_n0=eb_n0,
        ber=min(max(ber, 0.0), 0.5),
    )


def block_error_rate(ber: float, n_bits: int) -> float:
    """Probability that at least one of ``n_bits`` i.i.d. bits is flipped."""
    if not 0 <= ber <= 1:
        raise ValueError("ber must lie in [0, 1]")
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    if ber == 1:
        return 1.0
    return -math.expm1(n_bits * math.log1p(-ber))


def transmission_latency(n_bits: int, attempts: int, budget: LinkBudget, cfg: ChannelConfig) -> float:
    """Seconds to push ``attempts`` copies of ``n_bits`` plus the fixed overhead."""
    if n_bits < 0 or attempts < 1:
        raise ValueError("need n_bits >= 0 and attempts >= 1")
    if not budget.throughput_bps > 0:
        raise DegenerateChannelError("throughput is zero")
    return attempts * n_bits / budget.throughput_bps + cfg.fixed_overhead_s


# ---------------------------------------------------------------------------
# Monte Carlo bit-flip channel


def flip_positions(n: int, ber: float, rng) -> np.ndarray:
    """Indices of flipped bits in an i.i.d. Bernoulli(ber) process of length n.

    Gaps between flips are geometric, so only O(n * ber) draws are needed.
    """
    rng = np.random.default_rng(rng)
    if n == 0 or ber <= 0:
        return np.empty(0, dtype=np.int64)
    if ber >= 1:
        return np.arange(n, dtype=np.int64)
    chunks = []
    pos = -1
    batch = max(16, int(n * ber * 1.05 + 6 * math.sqrt(n * ber) + 16))
    while True:
        gaps = rng.geometric(ber, size=batch)
        idx = pos + np.cumsum(gaps)
        chunks.append(idx[idx < n])
        if idx[-1] >= n:
            break
        pos = idx[-1]
        batch = max(16, int((n - pos) * ber * 1.1) + 16)
    return np.concatenate(chunks)


_DENSE_LIMIT = 4096


def transmit_bits(bits, ber: float, rng_seed=None) -> np.ndarray:
    """Flip each bit independently with probability ``ber``.

    ``rng_seed`` may be an integer seed or a ``numpy.random.Generator``.
    """
    if not 0 <= ber <= 1:
        raise ValueError("ber must lie in [0, 1]")
    out = np.array(bits, dtype=np.uint8, copy=True).ravel()
    if 0 < ber < 1 and out.size <= _DENSE_LIMIT:
        # short blocks: one uniform per bit is cheaper than drawing gaps
        out ^= (np.random.default_rng(rng_seed).random(out.size) < ber).astype(np.uint8)
    else:
        out[flip_positions(out.size, ber, rng_seed)] ^= 1
    return out


# ---------------------------------------------------------------------------
# ARQ


class ArqResult(NamedTuple):
    delivered: np.ndarray
    attempts: int
    success: bool
    bits_sent: int
    segments: int


def undetected_error_bound(ber: float, n_bits: int) -> float:
    """Residual probability that a corrupted block slips past CRC32."""
    return block_error_rate(ber, n_bits) * 2.0 ** -CRC_BITS


def expected_arq_bits(payload_bits: int, ber: float, segment_bytes: int) -> float:
    """Expected channel bits to deliver ``payload_bits`` with per-segment CRC32."""
    if payload_bits <= 0:
        return 0.0
    seg = 8 * segment_bytes
    full, rest = divmod(payload_bits, seg)
    total = 0.0
    for n, count in ((seg, full), (rest, 1 if rest else 0)):
        if count:
            block = n + CRC_BITS
            p_ok = 1.0 - block_error_rate(ber, block)
            total += math.inf if p_ok == 0 else count * block / p_ok
    return total


def optimal_segment_bytes(payload_bits: int, ber: float) -> int:
    """Segment size (bytes) minimising the expected number of bits on air."""
    n_bytes = max(1, -(-payload_bits // 8))
    if ber <= 0:
        return n_bytes
    if ber >= 1:
        return 1
    # cost is unimodal-ish in segment size; the optimum is small for noisy
    # links, so a linear scan over a bounded range is cheap
    limit = min(n_bytes, max(1, int(64 / ber)))
    best, best_cost = 1, math.inf
    for s in range(1, limit + 1):
        cost = expected_arq_bits(payload_bits, ber, s)
        if cost < best_cost:
            best, best_cost = s, cost
    return best


@lru_cache(maxsize=256)
def _crc_tables(n_bits: int) -> tuple[np.ndarray, int]:
    """CRC32 over ``n_bits`` zero-padded bits, split into per-byte lookups.

    CRC32 is affine over GF(2), so ``crc(m) = c ^ XOR_j T[j, byte_j(m)]``
    where ``c`` is the CRC of the all-zero message. Returns ``(T, c)``.
    """
    n_bytes = -(-n_bits // 8)
    zero = bytes(n_bytes)
    c = crc32(zero)
    # contribution of every single set bit, then all 256 byte values per position
    basis = np.empty((n_bytes, 8), dtype=np.uint32)
    for j in range(n_bytes):
        for b in range(8):
            msg = bytearray(zero)
            msg[j] = 0x80 >> b
            basis[j, b] = crc32(bytes(msg)) ^ c
    values = np.arange(256, dtype=np.uint8)
    bitmask = np.unpackbits(values[:, None], axis=1).astype(bool)  # (256, 8), MSB first
    table = np.zeros((n_bytes, 256), dtype=np.uint32)
    for b in range(8):
        table[:, bitmask[:, b]] ^= basis[:, b:b + 1]
    return table, c


def crc_ok_batch(blocks: np.ndarray, n_bits: int) -> np.ndarray:
    """Verify rows of ``payload || crc32`` blocks; returns a boolean per row."""
    table, c = _crc_tables(n_bits)
    packed = np.packbits(blocks[:, :n_bits], axis=1)
    crc = np.bitwise_xor.reduce(table[np.arange(table.shape[0]), packed], axis=1) ^ np.uint32(c)
    tail = np.packbits(blocks[:, n_bits:n_bits + CRC_BITS], axis=1).astype(np.uint32)
    got = (tail[:, 0] << 24) | (tail[:, 1] << 16) | (tail[:, 2] << 8) | tail[:, 3]
    return crc == got


def arq_transmit(payload, budget: LinkBudget | float, rel: ReliabilityConfig, rng_seed=None) -> ArqResult:
    """Deliver ``payload`` bits with CRC32-checked retransmission.

    The payload is cut into segments (see :class:`ReliabilityConfig`); each
    segment plus its CRC is resent through :func:`transmit_bits` until the
    receiver's CRC check passes. ``attempts`` counts every segment
    transmission, ``bits_sent`` every bit put on the channel.

    Raises :class:`ReliabilityExhaustedError` when a segment fails
    ``rel.max_attempts`` times.
    """
    payload = np.asarray(payload, dtype=np.uint8).ravel()
    if payload.size == 0:
        raise ValueError("payload must be non-empty")
    ber = budget.ber if isinstance(budget, LinkBudget) else float(budget)
    seg_bytes = rel.segment_bytes or optimal_segment_bytes(payload.size, ber)
    seg_bits = 8 * seg_bytes

    if undetected_error_bound(ber, min(seg_bits, payload.size) + CRC_BITS) > rel.epsilon:
        raise ReliabilityConfigError(
            f"CRC32 leakage exceeds epsilon={rel.epsilon}; use a larger epsilon"
        )

    rng = np.random.default_rng(rng_seed)
    delivered = np.empty_like(payload)
    attempts = 0
    bits_sent = 0
    starts = list(range(0, payload.size, seg_bits))
    # group segments by length so each group is checked with one matrix
    groups: dict[int, list[int]] = {}
    for s in starts:
        groups.setdefault(min(seg_bits, payload.size - s), []).append(s)

    for n, group_starts in groups.items():
        sent = np.stack([np.concatenate([payload[s:s + n], crc32_bits(payload[s:s + n])])
                         for s in group_starts])
        received = np.empty((len(group_starts), n), dtype=np.uint8)
        pending = np.arange(len(group_starts))
        for _ in range(rel.max_attempts):
            block = sent[pending]
            rx = transmit_bits(block, ber, rng).reshape(block.shape)
            attempts += len(pending)
            bits_sent += block.size
            ok = crc_ok_batch(rx, n)
            received[pending[ok]] = rx[ok, :n]
            pending = pending[~ok]
            if pending.size == 0:
                break
        else:
            raise ReliabilityExhaustedError(
                f"{pending.size} segment(s) failed CRC after {rel.max_attempts} attempts",
                attempts=attempts,
            )
        for s, row in zip(group_starts, received):
            delivered[s:s + n] = row

    return ArqResult(delivered, attempts, True, bits_sent, len(starts))

