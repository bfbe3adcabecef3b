"""Vector-quantization codec: shared codebooks, nearest-codeword encoding
and affine patch decoding.

Codebook binary layout (big-endian)::

    "MRGC" | version u8 | K u32 | d u16 | K*d float32 | CRC32 u32

The trailing CRC32 doubles as the codebook id carried in payload headers, so a
receiver holding a different codebook detects the mismatch.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .._bits import crc32
from ..errors import CodebookFormatError, DimensionMismatchError, UnknownCodebookError
from .patches import assemble_patches, extract_patches

CODEBOOK_MAGIC = b"MRGC"
CODEBOOK_VERSION = 1
_HEADER = struct.Struct(">4sBIH")


def index_bits(K: int) -> int:
    """Fixed-length index width, ``ceil(log2 K)``."""
    if K < 2:
        raise ValueError("codebook size must be >= 2")
    return (K - 1).bit_length()


def vq_cost_bits(h: int, w: int, K: int) -> int:
    return h * w * index_bits(K)


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: np.ndarray
    id: int = field(init=False)

    def __post_init__(self):
        cw = np.array(self.codewords, dtype=float)
        if cw.ndim != 2 or cw.shape[0] < 2:
            raise ValueError("codebook needs shape (K, d) with K >= 2")
        if cw.shape[1] < 1 or cw.shape[1] > 0xFFFF:
            raise ValueError("codeword dimension out of range")
        if not np.all(np.isfinite(cw)):
            raise ValueError("codewords must be finite")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)
        object.__setattr__(self, "id", crc32(self._body()))

    @property
    def K(self) -> int:
        return self.codewords.shape[0]

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]

    @property
    def index_bits(self) -> int:
        return index_bits(self.K)

    def _body(self) -> bytes:
        head = _HEADER.pack(CODEBOOK_MAGIC, CODEBOOK_VERSION, self.K, self.dim)
        return head + self.codewords.astype(">f4").tobytes()

    def to_bytes(self) -> bytes:
        body = self._body()
        return body + struct.pack(">I", crc32(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Codebook":
        if len(data) < _HEADER.size + 4:
            raise CodebookFormatError("codebook stream is truncated")
        magic, version, K, d = _HEADER.unpack_from(data)
        if magic != CODEBOOK_MAGIC:
            raise CodebookFormatError(f"bad codebook magic {magic!r}")
        if version != CODEBOOK_VERSION:
            raise CodebookFormatError(f"unsupported codebook version {version}")
        end = _HEADER.size + 4 * K * d
        if len(data) != end + 4:
            raise CodebookFormatError("codebook length does not match K and d")
        (crc,) = struct.unpack_from(">I", data, end)
        if crc != crc32(data[:end]):
            raise CodebookFormatError("codebook CRC mismatch")
        cw = np.frombuffer(data, dtype=">f4", count=K * d, offset=_HEADER.size)
        return cls(cw.astype(float).reshape(K, d))

    def save(self, path) -> None:
        tmp = f"{path}.tmp"
        with open(tmp, "wb") as fh:
            fh.write(self.to_bytes())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "Codebook":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


@dataclass(eq=False)
class IndexMap:
    h: int
    w: int
    indices: np.ndarray
    codebook_id: int

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64).ravel()
        if self.indices.size != self.h * self.w:
            raise DimensionMismatchError("index count must equal h*w")

    def __eq__(self, other):
        return (isinstance(other, IndexMap) and (self.h, self.w, self.codebook_id)
                == (other.h, other.w, other.codebook_id)
                and np.array_equal(self.indices, other.indices))


@dataclass(eq=False)
class PatchEncoder:
    """Affine map from a flattened patch to a d-dimensional latent."""

    patch: int
    channels: int
    w: np.ndarray  # (d, P)
    b: np.ndarray  # (d,)

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def __call__(self, frame) -> np.ndarray:
        frame = np.asarray(frame, dtype=float)
        if frame.ndim != 3 or frame.shape[2] != self.channels:
            raise DimensionMismatchError(f"frame shape {frame.shape} vs {self.channels} channels")
        X, h, w = extract_patches(frame, self.patch)
        return (X @ self.w.T + self.b).T.reshape(self.dim, h, w)


@dataclass(eq=False)
class PatchDecoder:
    """Affine map from a d-dimensional codeword back to a patch."""

    patch: int
    channels: int
    w: np.ndarray  # (P, d)
    b: np.ndarray  # (P,)

    @classmethod
    def identity(cls, dim: int) -> "PatchDecoder":
        return cls(1, dim, np.eye(dim), np.zeros(dim))

    def decode_vectors(self, vectors, h: int, w: int) -> np.ndarray:
        X = np.asarray(vectors, dtype=float) @ self.w.T + self.b
        return assemble_patches(X, h, w, self.patch, self.channels)


def nearest_codeword(vectors, codewords, chunk: int = 1024) -> np.ndarray:
    """Index of the closest codeword for each row; lowest index wins ties."""
    vectors = np.asarray(vectors, dtype=float)
    codewords = np.asarray(codewords, dtype=float)
    out = np.empty(len(vectors), dtype=np.int64)
    step = max(1, chunk * 256 // max(1, codewords.shape[0]))
    cwT = np.ascontiguousarray(codewords.T)
    for start in range(0, len(vectors), step):
        v = vectors[start:start + step]
        # exact squared differences, accumulated one coordinate at a time
        d2 = np.zeros((len(v), len(codewords)))
        for k in range(codewords.shape[1]):
            diff = v[:, k:k + 1] - cwT[k]
            d2 += diff * diff
        out[start:start + step] = d2.argmin(axis=1)
    return out


def vq_encode(z, cb: Codebook) -> IndexMap:
    """Quantize a (c, h, w) latent grid against ``cb``."""
    z = np.asarray(z, dtype=float)
    if z.ndim != 3 or z.shape[0] != cb.dim:
        raise DimensionMismatchError(f"latent shape {z.shape} vs codebook dim {cb.dim}")
    c, h, w = z.shape
    idx = nearest_codeword(z.reshape(c, h * w).T, cb.codewords)
    return IndexMap(h, w, idx, cb.id)


def vq_decode(s: IndexMap, cb: Codebook, decoder: PatchDecoder) -> np.ndarray:
    """Look up codewords and decode them to a frame clamped to [0, 1].

    Indices at or beyond K (possible after channel corruption) saturate to K-1.
    """
    if s.codebook_id != cb.id:
        raise UnknownCodebookError(
            f"payload references codebook {s.codebook_id:#010x}, receiver holds {cb.id:#010x}")
    idx = np.minimum(s.indices, cb.K - 1)
    frame = decoder.decode_vectors(cb.codewords[idx], s.h, s.w)
    return np.clip(frame, 0.0, 1.0)
