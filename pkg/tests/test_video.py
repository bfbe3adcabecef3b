import json

import numpy as np
import pytest

from mirage.errors import IngestError
from mirage.video import VideoTensor, decode_ppm, encode_ppm, export_frames, ingest, synthetic_video


def _fixture(tmp_path, frames=2, count=None, dims=(4, 4)):
    rng = np.random.default_rng(0)
    data = rng.integers(0, 256, (frames, dims[1], dims[0], 3), dtype=np.uint8)
    names = []
    for i, f in enumerate(data):
        name = f"f{i}.ppm"
        (tmp_path / name).write_bytes(b"P6\n# fixture\n%d %d\n255\n" % dims + f.tobytes())
        names.append(name)
    manifest = {"width": 4, "height": 4, "channels": 3, "fps": 12.5,
                "frame_count": frames if count is None else count, "frames": names}
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    return data


def test_ingest_fixture(tmp_path):
    data = _fixture(tmp_path)
    v = ingest(tmp_path)
    assert v.n == 2 and v.fps == 12.5
    np.testing.assert_array_equal(v.frames, data / 255.0)
    assert v.frames.min() >= 0 and v.frames.max() <= 1


def test_byte_255_is_exactly_one():
    frame = decode_ppm(b"P6 1 1 255\n" + bytes([255, 0, 128]))
    assert frame[0, 0, 0] == 1.0 and frame[0, 0, 1] == 0.0


def test_ingest_errors(tmp_path):
    with pytest.raises(IngestError):
        ingest(tmp_path)
    _fixture(tmp_path, count=3)
    with pytest.raises(IngestError):
        ingest(tmp_path)


def test_ingest_dim_mismatch(tmp_path):
    _fixture(tmp_path, dims=(5, 4))
    with pytest.raises(IngestError):
        ingest(tmp_path)


def test_ingest_unreadable(tmp_path):
    _fixture(tmp_path)
    (tmp_path / "f1.ppm").write_bytes(b"P3 garbage")
    with pytest.raises(IngestError):
        ingest(tmp_path)


def test_export_ingest_round_trip(tmp_path):
    v = synthetic_video(n=3, height=16, width=8)
    export_frames(v.frames, tmp_path / "out", fps=v.fps)
    back = ingest(tmp_path / "out")
    assert np.max(np.abs(back.frames - v.frames)) <= 0.5 / 255 + 1e-12
    assert np.array_equal(decode_ppm(encode_ppm(back.frames[0])), back.frames[0])


def test_synthetic_video_is_deterministic():
    a, b = synthetic_video(seed=2), synthetic_video(seed=2)
    assert a.shape == (256, 256, 3) and a.n == 16
    np.testing.assert_array_equal(a.frames, b.frames)
    with pytest.raises(ValueError):
        VideoTensor(np.full((1, 2, 2, 3), 1.5))
