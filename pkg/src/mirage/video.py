"""Video container, PPM frame I/O and directory ingestion."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestError


@dataclass(eq=False)
class VideoTensor:
    """``frames`` is an (n, H, W, D) float array with values in [0, 1]."""

    frames: np.ndarray
    fps: float = 25.0

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.ndim != 4 or len(self.frames) == 0:
            raise ValueError("frames must be a non-empty (n, H, W, D) array")
        if self.frames.min() < 0 or self.frames.max() > 1:
            raise ValueError("frame values must lie in [0, 1]")

    @property
    def n(self) -> int:
        return len(self.frames)

    @property
    def shape(self):
        return self.frames.shape[1:]


def synthetic_video(n: int = 16, height: int = 256, width: int = 256, channels: int = 3,
                    seed: int = 0, fps: float = 25.0) -> VideoTensor:
    """Moving colour gradient with a drifting bright square, seeded phases."""
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0, 2 * np.pi, channels)
    speed = rng.uniform(0.5, 1.5, channels)
    yy, xx = np.mgrid[0:height, 0:width]
    u, v = xx / width, yy / height
    side = max(2, min(height, width) // 6)
    frames = np.empty((n, height, width, channels))
    for t in range(n):
        for c in range(channels):
            frames[t, :, :, c] = 0.5 + 0.4 * np.sin(2 * np.pi * (u + 0.5 * v) + phase[c] + speed[c] * 0.4 * t)
        x0 = int((t * 7 + width // 8) % max(1, width - side))
        y0 = int(height // 3 + (height // 6) * np.sin(0.5 * t))
        y0 = min(max(y0, 0), height - side)
        frames[t, y0:y0 + side, x0:x0 + side, :] = 0.95
    return VideoTensor(frames, fps)


# ---------------------------------------------------------------------------
# PPM (binary P6, maxval 255)


def encode_ppm(frame) -> bytes:
    frame = np.asarray(frame, dtype=float)
    if frame.ndim == 2:
        frame = frame[..., None]
    if frame.shape[2] == 1:
        frame = np.repeat(frame, 3, axis=2)
    if frame.shape[2] != 3:
        raise ValueError("PPM frames need 1 or 3 channels")
    H, W, _ = frame.shape
    data = np.floor(np.clip(frame, 0, 1) * 255 + 0.5).astype(np.uint8)
    return b"P6\n%d %d\n255\n" % (W, H) + data.tobytes()


def _ppm_tokens(data: bytes, count: int):
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PPM header")
        tokens.append(data[start:pos])
    return tokens, pos + 1  # one whitespace byte ends the header


def decode_ppm(data: bytes) -> np.ndarray:
    """Decode a P6 image into an (H, W, 3) float array scaled by 1/255."""
    try:
        (magic, w, h, maxval), pos = _ppm_tokens(data, 4)
        W, H, maxval = int(w), int(h), int(maxval)
    except (ValueError, IndexError):
        raise ValueError("malformed PPM header") from None
    if magic != b"P6" or maxval != 255:
        raise ValueError("only binary P6 with maxval 255 is supported")
    need = W * H * 3
    if len(data) - pos < need:
        raise ValueError("PPM pixel data is truncated")
    pixels = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    return pixels.reshape(H, W, 3) / 255.0


def ingest(directory) -> VideoTensor:
    """Load ``manifest.json`` plus its PPM frames from ``directory``.

    Manifest keys: width, height, channels, fps, frame_count, frames (file list).
    """
    directory = Path(directory)
    mpath = directory / "manifest.json"
    if not mpath.is_file():
        raise IngestError(f"missing manifest: {mpath}")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
        W, H = int(manifest["width"]), int(manifest["height"])
        D = int(manifest.get("channels", 3))
        fps = float(manifest.get("fps", 25.0))
        count = int(manifest["frame_count"])
        files = list(manifest["frames"])
    except (KeyError, TypeError, ValueError) as exc:
        raise IngestError(f"malformed manifest {mpath}: {exc}") from None
    if D != 3:
        raise IngestError("PPM P6 ingestion supports 3 channels only")
    if count != len(files):
        raise IngestError(f"manifest declares {count} frames but lists {len(files)}")
    frames = []
    for name in files:
        path = directory / name
        if not path.is_file():
            raise IngestError(f"frame file missing: {path}")
        try:
            frame = decode_ppm(path.read_bytes())
        except ValueError as exc:
            raise IngestError(f"unreadable frame {path}: {exc}") from None
        if frame.shape != (H, W, D):
            raise IngestError(f"{path} is {frame.shape[1]}x{frame.shape[0]}, manifest says {W}x{H}")
        frames.append(frame)
    if not frames:
        raise IngestError("manifest lists no frames")
    return VideoTensor(np.stack(frames), fps)


def export_frames(frames, directory, fps: float = 25.0, prefix: str = "frame") -> Path:
    """Write frames as PPM files plus a manifest that :func:`ingest` accepts."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frames = np.asarray(frames, dtype=float)
    names = []
    for i, f in enumerate(frames):
        name = f"{prefix}_{i:05d}.ppm"
        atomic_write(directory / name, encode_ppm(f))
        names.append(name)
    H, W = frames.shape[1:3]
    manifest = {"width": W, "height": H, "channels": 3, "fps": fps,
                "frame_count": len(names), "frames": names}
    atomic_write(directory / "manifest.json", json.dumps(manifest, indent=2).encode())
    return directory


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
