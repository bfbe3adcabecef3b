from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatchError


def extract_patches(frame, patch: int) -> tuple[np.ndarray, int, int]:
    """Split an (H, W, D) frame into non-overlapping square patches.

    Returns ``(patches, h, w)`` where ``patches`` has shape ``(h*w, patch*patch*D)``
    in row-major grid order.
    """
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 3:
        raise DimensionMismatchError(f"expected an (H, W, D) frame, got shape {frame.shape}")
    H, W, D = frame.shape
    if H % patch or W % patch:
        raise DimensionMismatchError(f"patch size {patch} does not divide frame {H}x{W}")
    h, w = H // patch, W // patch
    p = frame.reshape(h, patch, w, patch, D).transpose(0, 2, 1, 3, 4)
    return p.reshape(h * w, patch * patch * D), h, w


def assemble_patches(patches, h: int, w: int, patch: int, channels: int) -> np.ndarray:
    p = np.asarray(patches).reshape(h, w, patch, patch, channels).transpose(0, 2, 1, 3, 4)
    return p.reshape(h * patch, w * patch, channels)


def video_patches(frames, patch: int) -> np.ndarray:
    """Stack the patches of every frame in ``frames`` (n, H, W, D)."""
    return np.concatenate([extract_patches(f, patch)[0] for f in np.asarray(frames)])
