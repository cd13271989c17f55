"""Default Huffman tables, canonical code construction and entropy bit I/O."""

import numpy as np

from .errors import JpegFormatError

# Zigzag scan: ZIGZAG[k] is the natural (row-major) index of the k-th element.
ZIGZAG = np.array(
    [
        0,  1,  8, 16,  9,  2,  3, 10,
        17, 24, 32, 25, 18, 11,  4,  5,
        12, 19, 26, 33, 40, 48, 41, 34,
        27, 20, 13,  6,  7, 14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36,
        29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46,
        53, 60, 61, 54, 47, 55, 62, 63,
    ]
)

# Default table specs: (code lengths 1..16, symbol values).
DC_LUMA_SPEC = (
    bytes([0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0]),
    bytes(range(12)),
)
DC_CHROMA_SPEC = (
    bytes([0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0]),
    bytes(range(12)),
)
AC_LUMA_SPEC = (
    bytes([0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 125]),
    bytes(
        [
            0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
            0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
            0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
            0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
            0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
            0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
            0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
            0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
            0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
            0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
            0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
            0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
            0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
            0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
        ]
    ),
)
AC_CHROMA_SPEC = (
    bytes([0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 119]),
    bytes(
        [
            0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
            0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
            0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1,
            0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
            0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
            0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
            0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74,
            0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
            0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A,
            0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
            0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7,
            0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
            0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4,
            0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
        ]
    ),
)


class HuffmanCodec:
    """Canonical Huffman codec built from a (lengths, values) table spec."""

    def __init__(self, lengths, values):
        if len(lengths) != 16:
            raise ValueError("Huffman spec needs 16 length counts")
        if sum(lengths) != len(values):
            raise ValueError("Huffman spec length counts do not match value count")
        self.lengths = bytes(lengths)
        self.values = bytes(values)
        self.encode_map = {}
        self.decode_map = {}
        code = 0
        idx = 0
        for size, count in enumerate(lengths, start=1):
            for _ in range(count):
                symbol = values[idx]
                self.encode_map[symbol] = (code, size)
                self.decode_map[(size, code)] = symbol
                code += 1
                idx += 1
            code <<= 1

    def encode_symbol(self, symbol):
        try:
            return self.encode_map[symbol]
        except KeyError:
            raise JpegFormatError(f"symbol 0x{symbol:02X} has no Huffman code") from None


def magnitude_category(value):
    """Number of bits needed for |value| (JPEG SSSS category)."""
    return int(abs(int(value))).bit_length()


def magnitude_bits(value, category):
    """Low-order bits encoding the signed magnitude (one's-complement negatives)."""
    if value < 0:
        return value + (1 << category) - 1
    return value


def extend_magnitude(bits, category):
    """Inverse of :func:`magnitude_bits`."""
    if category == 0:
        return 0
    if bits < (1 << (category - 1)):
        return bits - (1 << category) + 1
    return bits


class BitWriter:
    """MSB-first bit writer with 0xFF00 byte stuffing."""

    def __init__(self):
        self._acc = 0
        self._nbits = 0
        self.data = bytearray()

    def write(self, value, nbits):
        self._acc = (self._acc << nbits) | (value & ((1 << nbits) - 1))
        self._nbits += nbits
        while self._nbits >= 8:
            self._nbits -= 8
            byte = (self._acc >> self._nbits) & 0xFF
            self.data.append(byte)
            if byte == 0xFF:
                self.data.append(0x00)
        self._acc &= (1 << self._nbits) - 1

    def flush(self):
        if self._nbits:
            pad = 8 - self._nbits
            self.write((1 << pad) - 1, pad)
        return bytes(self.data)


class BitReader:
    """MSB-first bit reader that removes 0xFF00 stuffing and stops at markers."""

    def __init__(self, data, pos=0):
        self.data = data
        self.pos = pos
        self._acc = 0
        self._nbits = 0

    def _pull_byte(self):
        if self.pos >= len(self.data):
            raise JpegFormatError("truncated entropy-coded data")
        byte = self.data[self.pos]
        if byte == 0xFF:
            if self.pos + 1 >= len(self.data):
                raise JpegFormatError("truncated entropy-coded data")
            if self.data[self.pos + 1] != 0x00:
                # A real marker inside the scan: the stream ended early.
                raise JpegFormatError(
                    f"marker 0xFF{self.data[self.pos + 1]:02X} inside entropy-coded data"
                )
            self.pos += 2
        else:
            self.pos += 1
        self._acc = (self._acc << 8) | byte
        self._nbits += 8

    def read_bit(self):
        if self._nbits == 0:
            self._pull_byte()
        self._nbits -= 1
        return (self._acc >> self._nbits) & 1

    def read_bits(self, nbits):
        value = 0
        for _ in range(nbits):
            value = (value << 1) | self.read_bit()
        return value

    def decode_symbol(self, codec):
        code = 0
        for size in range(1, 17):
            code = (code << 1) | self.read_bit()
            symbol = codec.decode_map.get((size, code))
            if symbol is not None:
                return symbol
        raise JpegFormatError("invalid Huffman code in entropy-coded data")

    def align(self):
        """Drop buffered bits so the next marker can be read at a byte boundary."""
        self._nbits = 0
        self._acc = 0


def default_codecs():
    """The four default codecs as {(kind, destination): codec}."""
    return {
        ("dc", 0): HuffmanCodec(*DC_LUMA_SPEC),
        ("ac", 0): HuffmanCodec(*AC_LUMA_SPEC),
        ("dc", 1): HuffmanCodec(*DC_CHROMA_SPEC),
        ("ac", 1): HuffmanCodec(*AC_CHROMA_SPEC),
    }
