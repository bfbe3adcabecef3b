"""Semantic payload wire format and lossless caption compression.

Layout, all multi-byte integers big-endian::

    "MRG1" | version u8 | scheme u8 | keyframe count u16
    per keyframe:
        h u16 | w u16 | tag u32 | codebook_id u32 | codes, MSB-first, byte-padded
    caption length in bytes u32 | caption bytes (raw DEFLATE)
    CRC32 u32 over everything above

``tag`` is K for VQ keyframes. For pixel/AE keyframes it packs the bit depth
and the number of code values per grid position: ``q | (values << 8)``.
"""
from __future__ import annotations

import enum
import struct
import zlib
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._bits import bits_to_codes, codes_to_bits, crc32
from .codec.vq import index_bits
from .errors import (
    BadMagicError,
    BadVersionError,
    CaptionDecodeError,
    CRCMismatchError,
    PayloadError,
    TruncatedStreamError,
)

MAGIC = b"MRG1"
VERSION = 1
_HEAD = struct.Struct(">4sBBH")
_KF = struct.Struct(">HHII")
_U32 = struct.Struct(">I")


class Scheme(enum.IntEnum):
    RAW = 0
    RAW_AE = 1
    MIRAGE_AE = 2
    MIRAGE_VQ = 3

    @property
    def cli_name(self) -> str:
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        try:
            return cls[name.upper().replace("-", "_")]
        except KeyError:
            raise ValueError(f"unknown scheme {name!r}") from None


# ---------------------------------------------------------------------------
# caption compression


def compress_caption(text: bytes | str) -> bytes:
    """Raw DEFLATE (RFC 1951) stream of the caption bytes."""
    if isinstance(text, str):
        text = text.encode("utf-8")
    c = zlib.compressobj(9, zlib.DEFLATED, -15)
    return c.compress(text) + c.flush()


def decompress_caption(data: bytes) -> bytes:
    d = zlib.decompressobj(-15)
    try:
        out = d.decompress(bytes(data)) + d.flush()
    except zlib.error as exc:
        raise CaptionDecodeError(f"malformed DEFLATE stream: {exc}") from None
    if not d.eof or d.unused_data:
        raise CaptionDecodeError("DEFLATE stream is incomplete or has trailing data")
    return out


# ---------------------------------------------------------------------------
# payload


@dataclass(eq=False)
class KeyframeCodes:
    """One keyframe's code section.

    ``values`` code values are stored per grid position, ``bits`` wide each.
    """

    h: int
    w: int
    tag: int
    codes: np.ndarray
    bits: int
    values: int = 1
    codebook_id: int = 0

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.int64).ravel()

    @classmethod
    def vq(cls, h, w, K, indices, codebook_id) -> "KeyframeCodes":
        return cls(h, w, K, indices, index_bits(K), 1, codebook_id)

    @classmethod
    def quantized(cls, h, w, q, codes, values, params_id=0) -> "KeyframeCodes":
        return cls(h, w, q | (values << 8), codes, q, values, params_id)

    @property
    def count(self) -> int:
        return self.h * self.w * self.values

    @property
    def code_bits(self) -> int:
        return self.count * self.bits

    def __eq__(self, other):
        return (isinstance(other, KeyframeCodes)
                and (self.h, self.w, self.tag, self.bits, self.values, self.codebook_id)
                == (other.h, other.w, other.tag, other.bits, other.values, other.codebook_id)
                and np.array_equal(self.codes, other.codes))


@dataclass(eq=False)
class SemanticPayload:
    scheme: Scheme
    keyframes: list = field(default_factory=list)
    caption: bytes = b""  # compressed

    @property
    def semantic_bits(self) -> int:
        return sum(k.code_bits for k in self.keyframes) + 8 * len(self.caption)

    @property
    def keyframe_bits(self) -> int:
        return sum(k.code_bits for k in self.keyframes)

    def __eq__(self, other):
        return (isinstance(other, SemanticPayload) and self.scheme == other.scheme
                and self.caption == other.caption and self.keyframes == other.keyframes)


def _tag_layout(scheme: Scheme, tag: int) -> tuple[int, int]:
    if scheme == Scheme.MIRAGE_VQ:
        if tag < 2:
            raise PayloadError(f"invalid codebook size {tag}")
        return index_bits(tag), 1
    q, values = tag & 0xFF, (tag >> 8) & 0xFF
    if not 1 <= q <= 16 or values < 1 or tag >> 16:
        raise PayloadError(f"invalid quantization tag {tag:#x}")
    return q, values


def _validate(payload: SemanticPayload):
    if len(payload.keyframes) > 0xFFFF:
        raise ValueError("too many keyframes")
    for k in payload.keyframes:
        if not (0 <= k.h <= 0xFFFF and 0 <= k.w <= 0xFFFF):
            raise ValueError("keyframe dimensions exceed 16 bits")
        if (k.bits, k.values) != _tag_layout(payload.scheme, k.tag):
            raise ValueError("keyframe tag disagrees with its bit layout")
        if k.codes.size != k.count:
            raise ValueError(f"keyframe carries {k.codes.size} codes, expected {k.count}")
        if k.codes.size and (k.codes.min() < 0 or k.codes.max() >= 1 << k.bits):
            raise ValueError("code value does not fit its bit width")


def pack_keyframe(k: KeyframeCodes) -> bytes:
    return np.packbits(codes_to_bits(k.codes, k.bits)).tobytes()


def frame_payload(payload: SemanticPayload) -> bytes:
    _validate(payload)
    parts = [_HEAD.pack(MAGIC, VERSION, int(payload.scheme), len(payload.keyframes))]
    for k in payload.keyframes:
        parts.append(_KF.pack(k.h, k.w, k.tag, k.codebook_id))
        parts.append(pack_keyframe(k))
    parts.append(_U32.pack(len(payload.caption)))
    parts.append(bytes(payload.caption))
    body = b"".join(parts)
    return body + _U32.pack(crc32(body))


def parse_payload(stream: bytes) -> SemanticPayload:
    stream = bytes(stream)
    if len(stream) < _HEAD.size + 4 + 4:
        raise TruncatedStreamError("stream shorter than the fixed header")
    body, (crc,) = stream[:-4], _U32.unpack(stream[-4:])
    if crc32(body) != crc:
        raise CRCMismatchError("payload CRC32 does not match")
    magic, version, scheme, n_kf = _HEAD.unpack_from(body)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise BadVersionError(f"unsupported version {version}")
    try:
        scheme = Scheme(scheme)
    except ValueError:
        raise PayloadError(f"unknown scheme id {scheme}") from None

    pos = _HEAD.size
    keyframes = []
    for _ in range(n_kf):
        if pos + _KF.size > len(body):
            raise TruncatedStreamError("keyframe header runs past end of stream")
        h, w, tag, cb_id = _KF.unpack_from(body, pos)
        pos += _KF.size
        bits, values = _tag_layout(scheme, tag)
        count = h * w * values
        nbytes = -(-count * bits // 8)
        if pos + nbytes > len(body):
            raise TruncatedStreamError("keyframe codes run past end of stream")
        raw = np.frombuffer(body, dtype=np.uint8, count=nbytes, offset=pos)
        codes = bits_to_codes(np.unpackbits(raw), bits, count)
        pos += nbytes
        keyframes.append(KeyframeCodes(h, w, tag, codes, bits, values, cb_id))
    if pos + 4 > len(body):
        raise TruncatedStreamError("caption length field missing")
    (n_cap,) = _U32.unpack_from(body, pos)
    pos += 4
    if pos + n_cap != len(body):
        raise TruncatedStreamError("caption length disagrees with stream size")
    return SemanticPayload(scheme, keyframes, body[pos:pos + n_cap])


class SizeReport(NamedTuple):
    semantic_bits: int
    overhead_bits: int
    total_bytes: int

    @property
    def semantic_kb(self) -> float:
        return self.semantic_bits / 8 / 1024

    @property
    def total_kb(self) -> float:
        return self.total_bytes / 1024


def payload_size_report(payload: SemanticPayload, framed: bytes | None = None) -> SizeReport:
    """Semantic bits (codes + caption) versus header/padding/CRC overhead."""
    if framed is None:
        framed = frame_payload(payload)
    total = len(framed)
    semantic = payload.semantic_bits
    return SizeReport(semantic, 8 * total - semantic, total)
