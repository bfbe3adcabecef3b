"""Fidelity and efficiency metrics. Pixel values are normalised to [0, 1]."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError, ZeroDenominatorError

PEAK = 1.0


@dataclass
class QualityReport:
    mse: float
    psnr_db: float
    bpp: float
    data_speedup: float | None = None
    latency_speedup: float | None = None


def mse(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(mse_value: float) -> float:
    """PSNR in dB for peak 1.0; a perfect match gives ``math.inf``."""
    if mse_value < 0:
        raise ValueError("mse must be non-negative")
    if mse_value == 0:
        return math.inf
    return 10.0 * math.log10(PEAK ** 2 / mse_value)


def bpp(semantic_bits: float, H: int, W: int) -> float:
    if H * W <= 0:
        raise ValueError("frame must have positive area")
    return semantic_bits / (H * W)


def speedups(record, baseline) -> tuple[float, float]:
    """(data, latency) speedup of ``record`` over ``baseline``.

    Both arguments need ``semantic_bytes`` and ``latency_s`` attributes.
    """
    if record.semantic_bytes <= 0 or record.latency_s <= 0:
        raise ZeroDenominatorError("record size and latency must be positive")
    if baseline.semantic_bytes <= 0 or baseline.latency_s <= 0:
        raise ZeroDenominatorError("baseline size and latency must be positive")
    return (baseline.semantic_bytes / record.semantic_bytes,
            baseline.latency_s / record.latency_s)
