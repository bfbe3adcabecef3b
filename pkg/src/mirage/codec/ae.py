"""Per-patch affine autoencoder with q-bit latent serialization.

Every ``patch x patch`` block is mapped to ``values_per_pixel * patch**2``
latent values, so with the default two values per pixel and q = 8 the wire
rate is exactly 16 bits per source pixel regardless of channel count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._bits import crc32
from ..errors import DimensionMismatchError
from .patches import assemble_patches, extract_patches, video_patches
from .pixels import _check_q


@dataclass(eq=False)
class AeParams:
    patch: int
    channels: int
    enc_w: np.ndarray  # (L, P)
    enc_b: np.ndarray  # (L,)
    dec_w: np.ndarray  # (P, L)
    dec_b: np.ndarray  # (P,)
    lo: float = -1.0
    hi: float = 1.0
    q: int = 8
    values_per_pixel: int = 2

    def __post_init__(self):
        _check_q(self.q)
        if not self.hi > self.lo:
            raise ValueError("latent range must satisfy hi > lo")
        L, P = self.latent_dim, self.patch_dim
        if self.enc_w.shape != (L, P) or self.dec_w.shape != (P, L):
            raise DimensionMismatchError("encoder/decoder weight shapes do not match patch geometry")

    @property
    def patch_dim(self) -> int:
        return self.patch * self.patch * self.channels

    @property
    def latent_dim(self) -> int:
        return self.values_per_pixel * self.patch * self.patch

    @property
    def params_id(self) -> int:
        """32-bit identifier of the shared parameter set."""
        blob = b"".join(np.ascontiguousarray(a, dtype=">f8").tobytes()
                        for a in (self.enc_w, self.enc_b, self.dec_w, self.dec_b))
        return crc32(blob + np.array([self.lo, self.hi], ">f8").tobytes())

    @classmethod
    def zeros(cls, patch: int = 4, channels: int = 3, q: int = 8, values_per_pixel: int = 2):
        L = values_per_pixel * patch * patch
        P = patch * patch * channels
        return cls(patch, channels, np.zeros((L, P)), np.zeros(L), np.zeros((P, L)), np.zeros(P),
                   q=q, values_per_pixel=values_per_pixel)

    def bits_per_frame(self, H: int, W: int) -> int:
        return self.values_per_pixel * H * W * self.q


def fit_ae(frames, patch: int = 4, q: int = 8, values_per_pixel: int = 2) -> AeParams:
    """Closed-form linear autoencoder: principal components of the patches.

    When the latent is wider than the patch (grayscale input) the surplus
    latent rows are zero.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim == 3:
        frames = frames[None]
    channels = frames.shape[-1]
    X = video_patches(frames, patch)
    mean = X.mean(axis=0)
    _, _, vt = np.linalg.svd(X - mean, full_matrices=False)
    L = values_per_pixel * patch * patch
    P = X.shape[1]
    basis = np.zeros((L, P))
    k = min(L, vt.shape[0])
    basis[:k] = vt[:k]
    Z = (X - mean) @ basis.T
    span = float(np.abs(Z).max()) if Z.size else 1.0
    span = span * 1.05 if span > 0 else 1.0
    return AeParams(patch, channels, basis, -basis @ mean, basis.T.copy(), mean,
                    lo=-span, hi=span, q=q, values_per_pixel=values_per_pixel)


def ae_encode(frame, params: AeParams) -> np.ndarray:
    """Encode a frame into a latent grid of shape (L, h, w)."""
    frame = np.asarray(frame, dtype=float)
    if frame.ndim != 3 or frame.shape[2] != params.channels:
        raise DimensionMismatchError(
            f"frame shape {frame.shape} does not match {params.channels} channels")
    X, h, w = extract_patches(frame, params.patch)
    Z = X @ params.enc_w.T + params.enc_b
    return Z.T.reshape(params.latent_dim, h, w)


def ae_decode(latent, params: AeParams) -> np.ndarray:
    latent = np.asarray(latent, dtype=float)
    if latent.ndim != 3 or latent.shape[0] != params.latent_dim:
        raise DimensionMismatchError(
            f"latent shape {latent.shape} does not match latent dim {params.latent_dim}")
    L, h, w = latent.shape
    X = latent.reshape(L, h * w).T @ params.dec_w.T + params.dec_b
    frame = assemble_patches(X, h, w, params.patch, params.channels)
    return np.clip(frame, 0.0, 1.0)


def ae_quantize(latent, params: AeParams) -> np.ndarray:
    """Uniform q-bit codes of the latent over ``[lo, hi]``, flattened C-order."""
    levels = (1 << params.q) - 1
    t = (np.asarray(latent, dtype=float) - params.lo) / (params.hi - params.lo)
    return np.floor(np.clip(t, 0.0, 1.0) * levels + 0.5).astype(np.int64).ravel()


def ae_dequantize(codes, params: AeParams, h: int, w: int) -> np.ndarray:
    levels = (1 << params.q) - 1
    t = np.asarray(codes, dtype=float) / levels
    return (params.lo + t * (params.hi - params.lo)).reshape(params.latent_dim, h, w)
