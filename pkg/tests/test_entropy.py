import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softjpeg.codec import (
    CoefficientGrid,
    CoefficientRangeError,
    JpegFormatError,
    encode_baseline,
    entropy_decode,
    entropy_encode,
    tables_for_quality,
)
from softjpeg.codec.huffman import ZIGZAG, BitReader, BitWriter


def make_grids(rng, rows, cols, height, width, dc_span=400, ac_span=200):
    grids = []
    for channel in ("Y", "Cb", "Cr"):
        blocks = rng.integers(-ac_span, ac_span + 1, (rows, cols, 8, 8))
        blocks[:, :, 0, 0] = rng.integers(-dc_span, dc_span + 1, (rows, cols))
        grids.append(CoefficientGrid(channel, blocks.astype(np.int64), height, width))
    return tuple(grids)


def test_zigzag_is_a_permutation():
    assert sorted(ZIGZAG.tolist()) == list(range(64))
    # spot-check the start and end of the scan
    assert ZIGZAG[:6].tolist() == [0, 1, 8, 16, 9, 2]
    assert ZIGZAG[-2:].tolist() == [62, 63]


def test_bitwriter_stuffs_ff_bytes():
    w = BitWriter()
    w.write(0xFF, 8)
    w.write(0xAB, 8)
    assert w.flush() == b"\xff\x00\xab"


def test_bitreader_unstuffs_and_detects_truncation():
    r = BitReader(b"\xff\x00\xab")
    assert r.read_bits(16) == 0xFFAB
    with pytest.raises(JpegFormatError, match="truncated"):
        r.read_bits(8)


def test_all_zero_single_block_image_is_a_valid_stream():
    grids = tuple(
        CoefficientGrid(ch, np.zeros((1, 1, 8, 8), dtype=np.int64), 8, 8)
        for ch in ("Y", "Cb", "Cr")
    )
    stream = entropy_encode(grids, tables_for_quality(50))
    assert stream[:2] == b"\xff\xd8"
    assert stream[-2:] == b"\xff\xd9"
    decoded, _, dims = entropy_decode(stream)
    assert dims == (8, 8)
    assert all(np.all(g.blocks == 0) for g in decoded)


def test_roundtrip_random_grids_exact():
    rng = np.random.default_rng(9)
    for rows, cols, h, w in [(1, 1, 8, 8), (3, 5, 24, 40), (4, 3, 25, 17)]:
        grids = make_grids(rng, rows, cols, h, w)
        tables = tables_for_quality(75)
        decoded, tables2, dims = entropy_decode(entropy_encode(grids, tables))
        assert dims == (h, w)
        assert np.array_equal(tables2.luma, tables.luma)
        assert np.array_equal(tables2.chroma, tables.chroma)
        for a, b in zip(grids, decoded):
            assert np.array_equal(a.blocks, b.blocks)
            assert (a.height, a.width) == (b.height, b.width)


@given(
    st.integers(1, 3),
    st.integers(1, 3),
    st.integers(0, 2**31 - 1),
)
@settings(max_examples=30, deadline=None)
def test_roundtrip_is_lossless_property(rows, cols, seed):
    rng = np.random.default_rng(seed)
    grids = make_grids(rng, rows, cols, rows * 8, cols * 8)
    decoded, _, _ = entropy_decode(entropy_encode(grids, tables_for_quality(60)))
    for a, b in zip(grids, decoded):
        assert np.array_equal(a.blocks, b.blocks)


def test_marker_segment_lengths_are_self_consistent():
    rng = np.random.default_rng(2)
    stream = entropy_encode(make_grids(rng, 2, 2, 16, 16), tables_for_quality(50))
    assert stream[:2] == b"\xff\xd8" and stream[-2:] == b"\xff\xd9"
    pos = 2
    seen = []
    while True:
        assert stream[pos] == 0xFF
        marker = stream[pos + 1]
        seen.append(marker)
        length = int.from_bytes(stream[pos + 2 : pos + 4], "big")
        pos += 2 + length
        if marker == 0xDA:
            break
        assert stream[pos] == 0xFF  # next segment starts where declared
    assert seen == [0xE0, 0xDB, 0xDB, 0xC0, 0xC4, 0xDA]


def test_extreme_but_codable_coefficients_roundtrip():
    blocks = np.zeros((1, 1, 8, 8), dtype=np.int64)
    blocks[0, 0, 0, 0] = -1024
    blocks[0, 0, 7, 7] = 1023
    blocks[0, 0, 0, 1] = -1023
    grids = tuple(CoefficientGrid(ch, blocks.copy(), 8, 8) for ch in ("Y", "Cb", "Cr"))
    decoded, _, _ = entropy_decode(entropy_encode(grids, tables_for_quality(50)))
    assert np.array_equal(decoded[0].blocks, blocks)


def test_oversized_ac_rejected():
    blocks = np.zeros((1, 1, 8, 8), dtype=np.int64)
    blocks[0, 0, 3, 3] = 1024  # needs an AC category beyond the tables
    grids = tuple(CoefficientGrid(ch, blocks.copy(), 8, 8) for ch in ("Y", "Cb", "Cr"))
    with pytest.raises(CoefficientRangeError, match="AC coefficient"):
        entropy_encode(grids, tables_for_quality(50))


def test_12bit_overflow_rejected():
    blocks = np.zeros((1, 1, 8, 8), dtype=np.int64)
    blocks[0, 0, 0, 0] = 3000
    grids = tuple(CoefficientGrid(ch, blocks.copy(), 8, 8) for ch in ("Y", "Cb", "Cr"))
    with pytest.raises(CoefficientRangeError, match="12-bit"):
        entropy_encode(grids, tables_for_quality(50))


@pytest.fixture(scope="module")
def valid_stream(small_image):
    return encode_baseline(small_image, tables_for_quality(50))


def test_missing_soi_rejected(valid_stream):
    with pytest.raises(JpegFormatError, match="SOI"):
        entropy_decode(b"\x00" + valid_stream)


def test_truncated_entropy_data_rejected(valid_stream):
    with pytest.raises(JpegFormatError, match="truncated|marker"):
        entropy_decode(valid_stream[:-200])


def test_marker_inside_entropy_data_rejected(valid_stream):
    cut = len(valid_stream) // 2
    with pytest.raises(JpegFormatError, match="marker 0xFFC4 inside"):
        entropy_decode(valid_stream[:cut] + b"\xff\xc4" + valid_stream[cut:][-2:])


def test_progressive_stream_rejected(valid_stream):
    patched = valid_stream.replace(b"\xff\xc0", b"\xff\xc2", 1)
    with pytest.raises(JpegFormatError, match="progressive"):
        entropy_decode(patched)


def test_subsampled_stream_rejected(valid_stream):
    sof = valid_stream.index(b"\xff\xc0")
    patched = bytearray(valid_stream)
    patched[sof + 11] = 0x22  # first component sampling factor
    with pytest.raises(JpegFormatError, match="subsampling"):
        entropy_decode(bytes(patched))


def test_arithmetic_coding_rejected(valid_stream):
    patched = valid_stream.replace(b"\xff\xc0", b"\xff\xc9", 1)
    with pytest.raises(JpegFormatError, match="arithmetic"):
        entropy_decode(patched)


def test_segment_length_mismatch_rejected(valid_stream):
    dqt = valid_stream.index(b"\xff\xdb")
    truncated = valid_stream[: dqt + 20]
    with pytest.raises(JpegFormatError, match="length mismatch|truncated"):
        entropy_decode(truncated)


def test_missing_eoi_rejected(valid_stream):
    with pytest.raises(JpegFormatError, match="EOI|truncated"):
        entropy_decode(valid_stream[:-2])
