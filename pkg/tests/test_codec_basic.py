import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from mirage._bits import bits_to_bytes, bits_to_codes, bytes_to_bits, codes_to_bits
from mirage.codec import (
    AeParams,
    ae_decode,
    ae_dequantize,
    ae_encode,
    ae_quantize,
    assemble_patches,
    dequantize,
    extract_patches,
    fit_ae,
    pixel_codes,
    quantize_pixels,
    unpack_pixels,
)
from mirage.errors import DimensionMismatchError


@given(width=st.integers(1, 32), data=st.data())
def test_code_bits_round_trip(width, data):
    codes = data.draw(st.lists(st.integers(0, 2**width - 1), max_size=50))
    bits = codes_to_bits(np.array(codes, dtype=np.uint64), width)
    assert bits.size == width * len(codes)
    assert bits_to_codes(bits, width, len(codes)).tolist() == codes


def test_codes_are_msb_first():
    assert codes_to_bits([5], 3).tolist() == [1, 0, 1]
    assert codes_to_bits([1], 10).tolist() == [0] * 9 + [1]


@given(st.binary(max_size=64))
def test_byte_bits_round_trip(data):
    assert bits_to_bytes(bytes_to_bits(data)) == data


def test_partial_byte_is_zero_padded():
    assert bits_to_bytes([1, 0, 1]) == bytes([0b10100000])


def test_pixel_quantizer_examples():
    assert pixel_codes([0.0, 1.0, 0.5], 8).tolist() == [0, 255, 128]
    assert pixel_codes([-0.2, 1.3], 4).tolist() == [0, 15]
    assert dequantize([255], 8)[0] == 1.0
    with pytest.raises(ValueError):
        pixel_codes([0.1], 0)


@given(arrays(np.float64, (4, 4, 3), elements=st.floats(0, 1)), st.integers(1, 16))
def test_quantization_error_bound(frame, q):
    bits, recon = quantize_pixels(frame, q)
    assert bits.size == frame.size * q
    assert np.max(np.abs(recon - frame)) <= 0.5 / (2**q - 1) + 1e-12
    np.testing.assert_array_equal(unpack_pixels(bits, q, frame.shape), recon)


def test_patch_layout_round_trip(rng):
    frame = rng.random((8, 12, 3))
    p, h, w = extract_patches(frame, 4)
    assert (p.shape, h, w) == ((6, 48), 2, 3)
    # second patch in row-major order covers columns 4..7 of the top band
    np.testing.assert_array_equal(p[1].reshape(4, 4, 3), frame[0:4, 4:8])
    np.testing.assert_array_equal(assemble_patches(p, h, w, 4, 3), frame)
    with pytest.raises(DimensionMismatchError):
        extract_patches(frame, 5)


def test_ae_rate_is_sixteen_bpp(ae_params):
    assert ae_params.bits_per_frame(256, 256) / (256 * 256) == 16


def test_ae_reconstruction_quality(video, ae_params):
    frame = video.frames[0]
    z = ae_encode(frame, ae_params)
    assert z.shape == (32, 64, 64)
    codes = ae_quantize(z, ae_params)
    assert codes.min() >= 0 and codes.max() < 256
    recon = ae_decode(ae_dequantize(codes, ae_params, 64, 64), ae_params)
    assert np.mean((recon - frame) ** 2) < 1e-4


def test_ae_is_lossless_before_quantization(rng):
    # grayscale: 2 latent values per pixel over-span the patch space
    frames = rng.random((2, 8, 8, 1))
    params = fit_ae(frames, patch=2)
    for f in frames:
        np.testing.assert_allclose(ae_decode(ae_encode(f, params), params), f, atol=1e-9)


def test_ae_params_id_tracks_weights():
    a = AeParams.zeros()
    b = AeParams.zeros()
    assert a.params_id == b.params_id
    b.dec_b[0] = 0.5
    assert a.params_id != b.params_id


def test_ae_shape_checks(ae_params):
    with pytest.raises(DimensionMismatchError):
        ae_encode(np.zeros((8, 8, 1)), ae_params)
    with pytest.raises(DimensionMismatchError):
        ae_decode(np.zeros((3, 2, 2)), ae_params)
