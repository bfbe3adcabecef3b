"""Uniform q-bit pixel quantizer used by the raw streaming baseline."""
from __future__ import annotations

import numpy as np

from .._bits import bits_to_codes, codes_to_bits


def _check_q(q):
    if not 1 <= q <= 16:
        raise ValueError(f"q must be in [1, 16], got {q}")


def pixel_codes(values, q: int) -> np.ndarray:
    """Integer codes ``round(v * (2^q - 1))`` with halves rounded up."""
    _check_q(q)
    levels = (1 << q) - 1
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    return np.floor(v * levels + 0.5).astype(np.int64)


def dequantize(codes, q: int) -> np.ndarray:
    _check_q(q)
    return np.asarray(codes, dtype=float) / ((1 << q) - 1)


def quantize_pixels(frame, q: int):
    """Quantize a frame to q bits per sample.

    Returns ``(bits, recon)``: the codes packed MSB-first in row-major sample
    order, and the dequantized frame.
    """
    frame = np.asarray(frame, dtype=float)
    codes = pixel_codes(frame, q)
    return codes_to_bits(codes, q), dequantize(codes, q)


def unpack_pixels(bits, q: int, shape) -> np.ndarray:
    count = int(np.prod(shape))
    return dequantize(bits_to_codes(bits, q, count), q).reshape(shape)
