import io

import numpy as np
import pytest

from softjpeg.codec import (
    PpmFormatError,
    QuantTablePair,
    bits_per_pixel,
    decode_baseline,
    decode_ppm,
    encode_baseline,
    encode_ppm,
    tables_for_quality,
)
from softjpeg.losses import psnr

PIL_Image = pytest.importorskip("PIL.Image")


def test_decode_matches_reference_decoder_within_one(natural_image):
    for seed, (h, w) in [(7, (120, 184)), (11, (97, 131)), (23, (64, 200))]:
        img = natural_image(h, w, seed)
        for quality in (10, 50, 90):
            stream = encode_baseline(img, tables_for_quality(quality))
            ref = np.asarray(PIL_Image.open(io.BytesIO(stream)).convert("RGB"))
            ours = decode_baseline(stream)
            assert np.abs(ours.astype(int) - ref.astype(int)).max() <= 1


def test_decode_of_reference_encoder_output_matches(natural_image):
    # The independent encoder's 4:4:4 baseline output must decode here with
    # at most one level of disagreement against its own decoder.
    img = natural_image(120, 184, seed=7)
    for quality in (50, 90):
        buf = io.BytesIO()
        PIL_Image.fromarray(img).save(buf, format="JPEG", quality=quality, subsampling=0)
        stream = buf.getvalue()
        ours = decode_baseline(stream)
        ref = np.asarray(PIL_Image.open(io.BytesIO(stream)).convert("RGB"))
        assert np.abs(ours.astype(int) - ref.astype(int)).max() <= 1


def test_constant_gray_with_identity_tables_is_near_lossless():
    img = np.full((40, 56, 3), 128, dtype=np.uint8)
    ones = QuantTablePair(np.ones((8, 8)), np.ones((8, 8)))
    decoded = decode_baseline(encode_baseline(img, ones))
    assert psnr(img, decoded) >= 50.0


def test_quality_50_psnr_in_natural_range(natural_image):
    img = natural_image(192, 256, seed=31)
    decoded = decode_baseline(encode_baseline(img, tables_for_quality(50)))
    assert 28.0 <= psnr(img, decoded) <= 40.0


def test_decoded_dimensions_match_input(natural_image):
    img = natural_image(37, 61, seed=3)
    decoded = decode_baseline(encode_baseline(img, tables_for_quality(80)))
    assert decoded.shape == img.shape


def test_768x512_encode_has_positive_finite_bpp(natural_image):
    img = natural_image(512, 768, seed=5)
    stream = encode_baseline(img, tables_for_quality(50))
    bpp = bits_per_pixel(stream, 768, 512)
    assert np.isfinite(bpp) and 0.0 < bpp
    assert 0.2 <= bpp <= 2.0


def test_ppm_roundtrip(natural_image):
    img = natural_image(33, 47, seed=13)
    assert np.array_equal(decode_ppm(encode_ppm(img)), img)


def test_ppm_header_comments_and_whitespace():
    data = b"P6 # comment\n# another\n 4\t2\n255\n" + bytes(range(24))
    img = decode_ppm(data)
    assert img.shape == (2, 4, 3)
    assert img.reshape(-1).tolist() == list(range(24))


@pytest.mark.parametrize(
    "blob, message",
    [
        (b"P5\n1 1\n255\n\x00", "not a binary PPM"),
        (b"P6\n2 2\n65535\n" + b"\x00" * 12, "maxval"),
        (b"P6\n2 2\n255\n\x00\x00", "truncated"),
        (b"P6\n0 2\n255\n", "zero-sized"),
    ],
)
def test_ppm_rejects_malformed(blob, message):
    with pytest.raises(PpmFormatError, match=message):
        decode_ppm(blob)
