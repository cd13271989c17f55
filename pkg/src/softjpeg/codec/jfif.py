"""Baseline sequential JFIF bitstream writer and parser (8-bit, 3 components, 4:4:4)."""

import struct

import numpy as np

from .blocks import CoefficientGrid, assemble_plane, partition_plane
from .color import rgb_to_ycbcr, ycbcr_to_rgb
from .dct import fdct_blocks, idct_blocks
from .errors import CoefficientRangeError, JpegFormatError
from .huffman import (
    AC_CHROMA_SPEC,
    AC_LUMA_SPEC,
    DC_CHROMA_SPEC,
    DC_LUMA_SPEC,
    ZIGZAG,
    BitReader,
    BitWriter,
    HuffmanCodec,
    default_codecs,
    extend_magnitude,
    magnitude_bits,
    magnitude_category,
)
from .intdecode import integer_idct_samples, ycbcr_samples_to_rgb
from .quant import QuantTablePair, dequantize_blocks, quantize_blocks

SOI = 0xD8
EOI = 0xD9
APP0 = 0xE0
DQT = 0xDB
SOF0 = 0xC0
SOF2 = 0xC2
DHT = 0xC4
DAC = 0xCC
SOS = 0xDA
DRI = 0xDD
COM = 0xFE

CHANNELS = ("Y", "Cb", "Cr")
# (component id, quantization/huffman destination) per channel.
_COMPONENTS = ((1, 0), (2, 1), (3, 1))


def _segment(marker, payload):
    return struct.pack(">BBH", 0xFF, marker, len(payload) + 2) + payload


def _app0_jfif():
    return _segment(APP0, b"JFIF\x00\x01\x01\x00" + struct.pack(">HHBB", 1, 1, 0, 0))


def _dqt_segment(dest, table):
    zz = np.asarray(table, dtype=np.int64).reshape(64)[ZIGZAG]
    return _segment(DQT, bytes([dest]) + bytes(int(v) for v in zz))


def _sof0_segment(height, width):
    payload = struct.pack(">BHHB", 8, height, width, 3)
    for comp_id, dest in _COMPONENTS:
        payload += struct.pack(">BBB", comp_id, 0x11, dest)
    return _segment(SOF0, payload)


def _dht_segment():
    payload = b""
    for cls_dest, (lengths, values) in (
        (0x00, DC_LUMA_SPEC),
        (0x10, AC_LUMA_SPEC),
        (0x01, DC_CHROMA_SPEC),
        (0x11, AC_CHROMA_SPEC),
    ):
        payload += bytes([cls_dest]) + lengths + values
    return _segment(DHT, payload)


def _sos_segment():
    payload = bytes([3])
    for comp_id, dest in _COMPONENTS:
        payload += bytes([comp_id, dest << 4 | dest])
    return _segment(SOS, payload + bytes([0, 63, 0]))


def _check_coefficient_range(grids):
    for grid in grids:
        peak = int(np.abs(grid.blocks).max()) if grid.blocks.size else 0
        if peak > 2047:
            raise CoefficientRangeError(
                f"{grid.channel} coefficient magnitude {peak} exceeds the signed 12-bit range"
            )


def _encode_block(writer, zz, prev_dc, dc_codec, ac_codec):
    diff = zz[0] - prev_dc
    cat = magnitude_category(diff)
    if cat > 11:
        raise CoefficientRangeError(f"DC difference {diff} is not Huffman-encodable")
    code, size = dc_codec.encode_symbol(cat)
    writer.write(code, size)
    if cat:
        writer.write(magnitude_bits(diff, cat), cat)

    run = 0
    for k in range(1, 64):
        v = zz[k]
        if v == 0:
            run += 1
            continue
        while run >= 16:
            code, size = ac_codec.encode_symbol(0xF0)
            writer.write(code, size)
            run -= 16
        cat = magnitude_category(v)
        if cat > 10:
            raise CoefficientRangeError(f"AC coefficient {v} is not Huffman-encodable")
        code, size = ac_codec.encode_symbol(run << 4 | cat)
        writer.write(code, size)
        writer.write(magnitude_bits(v, cat), cat)
        run = 0
    if run:
        code, size = ac_codec.encode_symbol(0x00)
        writer.write(code, size)
    return zz[0]


def entropy_encode(grids, tables):
    """Assemble a complete JFIF stream from quantized coefficient grids.

    ``grids`` is a (Y, Cb, Cr) tuple of integer CoefficientGrids with a common
    block-grid shape; ``tables`` is the QuantTablePair to embed in the DQT
    segments.  Raises CoefficientRangeError for coefficients the baseline
    Huffman tables cannot represent.
    """
    y, cb, cr = grids
    if not (y.blocks.shape == cb.blocks.shape == cr.blocks.shape):
        raise ValueError("coefficient grids must share one block-grid shape")
    _check_coefficient_range(grids)

    rows, cols = y.blocks.shape[:2]
    codecs = default_codecs()
    writer = BitWriter()
    prev_dc = [0, 0, 0]
    # Zigzag-ordered Python int lists: much faster in the symbol loop below.
    zz_all = [
        g.blocks.reshape(rows, cols, 64)[:, :, ZIGZAG].astype(np.int64).tolist()
        for g in grids
    ]
    dests = [dest for _, dest in _COMPONENTS]
    for r in range(rows):
        for c in range(cols):
            for ci in range(3):
                dest = dests[ci]
                prev_dc[ci] = _encode_block(
                    writer, zz_all[ci][r][c], prev_dc[ci],
                    codecs[("dc", dest)], codecs[("ac", dest)],
                )

    head = (
        struct.pack(">BB", 0xFF, SOI)
        + _app0_jfif()
        + _dqt_segment(0, tables.luma)
        + _dqt_segment(1, tables.chroma)
        + _sof0_segment(y.height, y.width)
        + _dht_segment()
        + _sos_segment()
    )
    return head + writer.flush() + struct.pack(">BB", 0xFF, EOI)


def _decode_block(reader, prev_dc, dc_codec, ac_codec):
    zz = [0] * 64
    cat = reader.decode_symbol(dc_codec)
    if cat > 11:
        raise JpegFormatError(f"invalid DC category {cat}")
    dc = prev_dc + extend_magnitude(reader.read_bits(cat), cat)
    zz[0] = dc
    k = 1
    while k < 64:
        rs = reader.decode_symbol(ac_codec)
        run, cat = rs >> 4, rs & 0x0F
        if cat == 0:
            if run == 0:  # EOB
                break
            if run == 15:  # ZRL
                k += 16
                continue
            raise JpegFormatError(f"invalid AC symbol 0x{rs:02X}")
        k += run
        if k > 63:
            raise JpegFormatError("AC run-length overflows the block")
        zz[k] = extend_magnitude(reader.read_bits(cat), cat)
        k += 1
    return zz, dc


class _StreamParser:
    def __init__(self, data):
        self.data = data
        self.pos = 0
        self.dims = None
        self.comp_qdest = None
        self.qtables = {}
        self.hcodecs = {}
        self.scan_dests = None

    def _need(self, n, what):
        if self.pos + n > len(self.data):
            raise JpegFormatError(f"truncated stream inside {what}")

    def parse_headers(self):
        self._need(2, "SOI")
        if self.data[0:2] != b"\xff\xd8":
            raise JpegFormatError("missing SOI marker at stream start")
        self.pos = 2
        while True:
            self._need(2, "marker")
            if self.data[self.pos] != 0xFF:
                raise JpegFormatError(
                    f"expected a marker, found byte 0x{self.data[self.pos]:02X}"
                )
            marker = self.data[self.pos + 1]
            while marker == 0xFF:  # fill bytes
                self.pos += 1
                self._need(2, "marker")
                marker = self.data[self.pos + 1]
            self.pos += 2
            if marker == EOI:
                raise JpegFormatError("EOI marker before any scan data")
            if marker == 0x01 or 0xD0 <= marker <= 0xD7:
                raise JpegFormatError(f"unexpected standalone marker 0xFF{marker:02X}")
            self._need(2, "segment length")
            seglen = struct.unpack_from(">H", self.data, self.pos)[0]
            if seglen < 2 or self.pos + seglen > len(self.data):
                raise JpegFormatError(f"segment 0xFF{marker:02X} length mismatch")
            payload = self.data[self.pos + 2 : self.pos + seglen]
            self.pos += seglen
            if marker == SOS:
                self._parse_sos(payload)
                return
            self._dispatch(marker, payload)

    def _dispatch(self, marker, payload):
        if marker == SOF0:
            self._parse_sof(payload)
        elif marker == SOF2:
            raise JpegFormatError("progressive JPEG is not supported")
        elif marker == DAC or 0xC8 <= marker <= 0xCF:
            raise JpegFormatError("arithmetic-coded JPEG is not supported")
        elif marker in (0xC1, 0xC3) or 0xC5 <= marker <= 0xC7:
            raise JpegFormatError(f"unsupported frame type 0xFF{marker:02X}")
        elif marker == DQT:
            self._parse_dqt(payload)
        elif marker == DHT:
            self._parse_dht(payload)
        elif marker == DRI:
            raise JpegFormatError("restart intervals are not supported")
        elif 0xE0 <= marker <= 0xEF or marker == COM:
            pass  # APPn / comment payloads are ignored
        else:
            raise JpegFormatError(f"unsupported marker 0xFF{marker:02X}")

    def _parse_sof(self, payload):
        if self.dims is not None:
            raise JpegFormatError("duplicate SOF marker")
        if len(payload) < 6:
            raise JpegFormatError("SOF0 segment length mismatch")
        precision, height, width, ncomp = struct.unpack_from(">BHHB", payload, 0)
        if precision != 8:
            raise JpegFormatError(f"only 8-bit sample precision is supported, got {precision}")
        if ncomp != 3:
            raise JpegFormatError(f"only 3-component YCbCr streams are supported, got {ncomp}")
        if height == 0 or width == 0:
            raise JpegFormatError("SOF0 declares a zero-sized image")
        if len(payload) != 6 + 3 * ncomp:
            raise JpegFormatError("SOF0 segment length mismatch")
        qdest = {}
        for i in range(ncomp):
            comp_id, sampling, dest = struct.unpack_from(">BBB", payload, 6 + 3 * i)
            if sampling != 0x11:
                raise JpegFormatError("chroma subsampling is not supported (need 1x1 sampling)")
            qdest[comp_id] = dest
        self.dims = (height, width)
        self.comp_qdest = qdest

    def _parse_dqt(self, payload):
        pos = 0
        while pos < len(payload):
            pqtq = payload[pos]
            pos += 1
            if pqtq >> 4 != 0:
                raise JpegFormatError("16-bit quantization tables are not supported")
            dest = pqtq & 0x0F
            if dest > 3:
                raise JpegFormatError(f"invalid quantization table destination {dest}")
            if pos + 64 > len(payload):
                raise JpegFormatError("DQT segment length mismatch")
            zz = np.frombuffer(payload[pos : pos + 64], dtype=np.uint8).astype(np.int64)
            pos += 64
            table = np.zeros(64, dtype=np.int64)
            table[ZIGZAG] = zz
            if table.min() < 1:
                raise JpegFormatError("quantization table contains a zero divisor")
            self.qtables[dest] = table.reshape(8, 8)
        if pos != len(payload):
            raise JpegFormatError("DQT segment length mismatch")

    def _parse_dht(self, payload):
        pos = 0
        while pos < len(payload):
            tcth = payload[pos]
            pos += 1
            cls, dest = tcth >> 4, tcth & 0x0F
            if cls > 1:
                raise JpegFormatError(f"invalid Huffman table class {cls}")
            if pos + 16 > len(payload):
                raise JpegFormatError("DHT segment length mismatch")
            lengths = payload[pos : pos + 16]
            pos += 16
            count = sum(lengths)
            if pos + count > len(payload):
                raise JpegFormatError("DHT segment length mismatch")
            values = payload[pos : pos + count]
            pos += count
            kind = "dc" if cls == 0 else "ac"
            self.hcodecs[(kind, dest)] = HuffmanCodec(lengths, values)
        if pos != len(payload):
            raise JpegFormatError("DHT segment length mismatch")

    def _parse_sos(self, payload):
        if self.dims is None:
            raise JpegFormatError("SOS marker before SOF0")
        if len(payload) < 1:
            raise JpegFormatError("SOS segment length mismatch")
        ncomp = payload[0]
        if ncomp != 3 or len(payload) != 1 + 2 * ncomp + 3:
            raise JpegFormatError("SOS must describe a 3-component interleaved scan")
        dests = []
        for i in range(ncomp):
            comp_id, tables = payload[1 + 2 * i], payload[2 + 2 * i]
            if comp_id not in self.comp_qdest:
                raise JpegFormatError(f"scan references unknown component {comp_id}")
            dests.append((self.comp_qdest[comp_id], tables >> 4, tables & 0x0F))
        ss, se, ahal = payload[-3], payload[-2], payload[-1]
        if (ss, se, ahal) != (0, 63, 0):
            raise JpegFormatError("spectral selection / successive approximation not supported")
        self.scan_dests = dests


def entropy_decode(data):
    """Parse a JFIF stream produced by :func:`entropy_encode`.

    Returns ``(grids, tables, (height, width))`` where grids are integer
    (Y, Cb, Cr) CoefficientGrids in natural block order.
    """
    parser = _StreamParser(bytes(data))
    parser.parse_headers()
    height, width = parser.dims
    rows = -(-height // 8)
    cols = -(-width // 8)

    comps = []
    for channel, (qdest, dc_dest, ac_dest) in zip(CHANNELS, parser.scan_dests):
        if qdest not in parser.qtables:
            raise JpegFormatError(f"missing quantization table {qdest}")
        dc = parser.hcodecs.get(("dc", dc_dest))
        ac = parser.hcodecs.get(("ac", ac_dest))
        if dc is None or ac is None:
            raise JpegFormatError(f"missing Huffman tables for component {channel}")
        comps.append((channel, qdest, dc, ac))

    reader = BitReader(parser.data, parser.pos)
    blocks = [np.zeros((rows, cols, 64), dtype=np.int64) for _ in comps]
    prev_dc = [0, 0, 0]
    zz_to_natural = ZIGZAG
    for r in range(rows):
        for c in range(cols):
            for ci, (_, _, dc_codec, ac_codec) in enumerate(comps):
                zz, prev_dc[ci] = _decode_block(reader, prev_dc[ci], dc_codec, ac_codec)
                block = blocks[ci][r, c]
                for k, v in enumerate(zz):
                    if v:
                        block[zz_to_natural[k]] = v

    # Skip padding and fill bytes, then demand EOI.
    pos = reader.pos
    while pos + 1 < len(parser.data) and parser.data[pos] == 0xFF and parser.data[pos + 1] == 0xFF:
        pos += 1
    if pos + 2 > len(parser.data) or parser.data[pos] != 0xFF or parser.data[pos + 1] != EOI:
        raise JpegFormatError("missing EOI marker after entropy-coded data")

    grids = tuple(
        CoefficientGrid(channel, blocks[ci].reshape(rows, cols, 8, 8), height, width)
        for ci, (channel, _, _, _) in enumerate(comps)
    )
    luma_dest = comps[0][1]
    chroma_dest = comps[1][1]
    tables = QuantTablePair(parser.qtables[luma_dest], parser.qtables[chroma_dest])
    return grids, tables, (height, width)


def forward_grids(rgb, tables=None):
    """Color-convert, block, and DCT an image; optionally quantize.

    With ``tables`` given, returns integer grids ready for entropy coding;
    without, returns real-valued DCT coefficient grids.
    """
    rgb = np.asarray(rgb)
    height, width = rgb.shape[:2]
    ycc = rgb_to_ycbcr(rgb)
    grids = []
    for ci, channel in enumerate(CHANNELS):
        coeffs = fdct_blocks(partition_plane(ycc[:, :, ci]))
        if tables is not None:
            coeffs = quantize_blocks(coeffs, tables.for_channel(channel))
        grids.append(CoefficientGrid(channel, coeffs, height, width))
    return tuple(grids)


def reconstruct_image(grids, tables):
    """Dequantize integer grids, invert the DCT, and return an RGB raster.

    Float transform path; planes are clamped to [0, 255] before the color
    conversion, as on the byte-oriented decode side.
    """
    planes = []
    for grid in grids:
        blocks = idct_blocks(dequantize_blocks(grid.blocks, tables.for_channel(grid.channel)))
        planes.append(np.clip(assemble_plane(blocks, grid.height, grid.width), 0.0, 255.0))
    return ycbcr_to_rgb(np.stack(planes, axis=-1))


def encode_baseline(rgb, tables):
    """Compress an (H, W, 3) uint8 raster to a JFIF stream."""
    return entropy_encode(forward_grids(rgb, tables), tables)


def decode_baseline(data):
    """Decode a JFIF stream back to an (H, W, 3) uint8 raster.

    Sample reconstruction uses the fixed-point arithmetic of the deployed
    decoders, so output is bit-compatible with them on our streams.
    """
    grids, tables, (height, width) = entropy_decode(data)
    planes = []
    for grid in grids:
        samples = integer_idct_samples(grid.blocks, tables.for_channel(grid.channel))
        rows, cols = samples.shape[:2]
        plane = samples.transpose(0, 2, 1, 3).reshape(rows * 8, cols * 8)
        planes.append(plane[:height, :width])
    return ycbcr_samples_to_rgb(*planes)


def bits_per_pixel(stream, width, height):
    return len(stream) * 8.0 / (width * height)
