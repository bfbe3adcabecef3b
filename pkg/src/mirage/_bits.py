"""Bit-level helpers shared by the codec, transport and channel layers.

Bitstreams are 1-D ``uint8`` arrays holding 0/1 values, most significant bit
of every code first.
"""
from __future__ import annotations

import zlib

import numpy as np


def _code_dtype(width: int):
    if width <= 8:
        return np.uint8
    if width <= 16:
        return np.uint16
    if width <= 32:
        return np.uint32
    return np.uint64


def codes_to_bits(codes, width: int) -> np.ndarray:
    """Expand integer codes into a flat MSB-first bit array, ``width`` bits each."""
    codes = np.asarray(codes).ravel()
    if width == 8:
        return np.unpackbits(codes.astype(np.uint8))
    dtype = _code_dtype(width)
    codes = codes.astype(dtype)
    shifts = np.arange(width - 1, -1, -1, dtype=dtype)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def bits_to_codes(bits, width: int, count: int | None = None) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    if count is None:
        count = bits.size // width
    bits = bits[: count * width]
    if width == 8:
        return np.packbits(bits).astype(np.int64)
    weights = (1 << np.arange(width - 1, -1, -1, dtype=np.int64))
    return bits.reshape(count, width).astype(np.int64) @ weights


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    """Pack bits MSB-first; a trailing partial byte is zero-padded."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def crc32(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


def crc32_bits(bits) -> np.ndarray:
    """CRC32 of a bitstream (zero-padded to whole bytes) as 32 MSB-first bits."""
    return codes_to_bits([crc32(bits_to_bytes(bits))], 32)
