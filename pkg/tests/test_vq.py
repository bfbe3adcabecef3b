import numpy as np
import pytest

from mirage.codec import (
    Codebook,
    IndexMap,
    PatchDecoder,
    PatchEncoder,
    index_bits,
    kmeans,
    kmeans_codebook,
    nearest_codeword,
    vq_cost_bits,
    vq_decode,
    vq_encode,
)
from mirage.errors import CodebookFormatError, DimensionMismatchError, InsufficientDataError, UnknownCodebookError

from oracles import nearest_loops


@pytest.mark.parametrize("K,bits", [(2, 1), (3, 2), (256, 8), (257, 9), (512, 9), (1024, 10)])
def test_index_bits(K, bits):
    assert index_bits(K) == bits


def test_vq_cost_examples():
    assert vq_cost_bits(16, 16, 256) == 2048
    assert vq_cost_bits(16, 16, 1024) == 2560
    assert vq_cost_bits(8, 8, 512) == 576
    assert vq_cost_bits(16, 16, 256) / (256 * 256) == 0.03125


def test_nearest_matches_loop_oracle(rng):
    cw = rng.normal(size=(37, 5))
    v = rng.normal(size=(200, 5))
    got = nearest_codeword(v, cw, chunk=8)
    assert got.tolist() == [nearest_loops(x, cw) for x in v]


def test_nearest_ties_go_low():
    cw = np.array([[1.0], [-1.0], [1.0]])
    assert nearest_codeword(np.array([[0.0], [1.0]]), cw).tolist() == [0, 0]


def test_codebook_file_round_trip(tmp_path, rng):
    cb = Codebook(rng.normal(size=(16, 4)).astype(np.float32))
    path = tmp_path / "cb.bin"
    cb.save(path)
    back = Codebook.load(path)
    np.testing.assert_array_equal(back.codewords, cb.codewords)
    assert back.id == cb.id
    assert not (tmp_path / "cb.bin.tmp").exists()


def test_codebook_id_is_trailing_crc(rng):
    cb = Codebook(rng.normal(size=(4, 2)))
    assert int.from_bytes(cb.to_bytes()[-4:], "big") == cb.id


@pytest.mark.parametrize("mutate", [
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:4] + b"\x09" + b[5:],
    lambda b: b[:-5],
    lambda b: b[:20] + bytes([b[20] ^ 1]) + b[21:],
    lambda b: b[:6],
])
def test_codebook_format_errors(mutate, rng):
    data = Codebook(rng.normal(size=(4, 3))).to_bytes()
    with pytest.raises(CodebookFormatError):
        Codebook.from_bytes(mutate(data))


def test_vq_encode_decode_identity_pipeline():
    cw = np.array([[0.0, 0.0], [1.0, 1.0], [0.2, 0.8]])
    cb = Codebook(cw)
    z = np.array([[[0.1, 0.9], [0.3, 0.4]], [[0.0, 0.9], [0.7, 0.4]]])  # (2, 2, 2)
    s = vq_encode(z, cb)
    assert s.indices.tolist() == [0, 1, 2, 2]
    out = vq_decode(s, cb, PatchDecoder.identity(2))
    assert out.shape == (2, 2, 2)
    np.testing.assert_array_equal(out[0, 1], [1.0, 1.0])


def test_vq_decode_saturates_and_checks_id():
    cb = Codebook(np.array([[0.0], [0.5], [1.0]]))
    s = IndexMap(1, 2, [3, 2], cb.id)  # 3 is out of range for K=3
    out = vq_decode(s, cb, PatchDecoder.identity(1))
    assert out.ravel().tolist() == [1.0, 1.0]
    with pytest.raises(UnknownCodebookError):
        vq_decode(IndexMap(1, 2, [0, 1], cb.id ^ 1), cb, PatchDecoder.identity(1))


def test_vq_encode_dimension_check():
    cb = Codebook(np.zeros((2, 3)) + [[0], [1]])
    with pytest.raises(DimensionMismatchError):
        vq_encode(np.zeros((2, 4, 4)), cb)


def test_patch_encoder_shapes(rng):
    enc = PatchEncoder(4, 3, rng.normal(size=(6, 48)), np.zeros(6))
    assert enc(rng.random((8, 16, 3))).shape == (6, 2, 4)


def test_kmeans_small_example():
    res = kmeans(np.array([0.0, 0.1, 0.9, 1.0]), 2, seed=0)
    assert sorted(res.centroids.ravel().round(12).tolist()) == [0.05, 0.95]


def test_kmeans_objective_non_increasing(rng):
    X = rng.normal(size=(500, 3))
    obj = kmeans(X, 12, seed=1).objective
    assert all(b <= a + 1e-9 for a, b in zip(obj, obj[1:]))


def test_kmeans_needs_distinct_points():
    with pytest.raises(InsufficientDataError):
        kmeans(np.ones((10, 2)), 2)


def test_kmeans_codebook_beats_random(rng):
    X = rng.normal(size=(800, 4)) * [3, 1, 1, 0.2]
    cb = kmeans_codebook(X[:600], 16, seed=2)
    rand = Codebook(X[rng.choice(600, 16, replace=False)])
    held = X[600:]

    def qmse(c):
        return np.mean(np.sum((held - c.codewords[nearest_codeword(held, c.codewords)]) ** 2, axis=1))

    assert qmse(cb) <= qmse(rand)
