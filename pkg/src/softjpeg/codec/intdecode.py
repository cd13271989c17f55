"""Integer sample reconstruction for decoding.

Reproduces the fixed-point inverse DCT and color-conversion arithmetic used
by the common deployed decoders, so that decode output is bit-compatible
with them.  The float orthonormal transform in ``dct`` stays the
mathematical inverse; this path exists purely for interchange fidelity.
"""

import numpy as np

# Fixed-point constants, 13 fractional bits (inverse DCT).
_F0_298631336 = 2446
_F0_390180644 = 3196
_F0_541196100 = 4433
_F0_765366865 = 6270
_F0_899976223 = 7373
_F1_175875602 = 9633
_F1_501321110 = 12299
_F1_847759065 = 15137
_F1_961570560 = 16069
_F2_053119869 = 16819
_F2_562915447 = 20995
_F3_072711026 = 25172


def _idct_1d(col, rounding, out_shift):
    """Shared even/odd butterfly for one pass over 8 lanes.

    ``col`` is a list of eight (N,) int64 arrays (already dequantized for
    pass 1).  Returns the eight output lanes, descaled by ``out_shift``.
    """
    z2, z3 = col[2], col[6]
    z1 = (z2 + z3) * _F0_541196100
    t2 = z1 + z2 * _F0_765366865
    t3 = z1 - z3 * _F1_847759065
    z2 = (col[0] << 13) + rounding
    z3 = col[4] << 13
    t0, t1 = z2 + z3, z2 - z3
    t10, t13 = t0 + t2, t0 - t2
    t11, t12 = t1 + t3, t1 - t3

    t0, t1, t2, t3 = col[7], col[5], col[3], col[1]
    z2, z3 = t0 + t2, t1 + t3
    z1 = (z2 + z3) * _F1_175875602
    z2 = z2 * -_F1_961570560 + z1
    z3 = z3 * -_F0_390180644 + z1
    z1 = (t0 + t3) * -_F0_899976223
    t0 = t0 * _F0_298631336 + z1 + z2
    t3 = t3 * _F1_501321110 + z1 + z3
    z1 = (t1 + t2) * -_F2_562915447
    t1 = t1 * _F2_053119869 + z1 + z3
    t2 = t2 * _F3_072711026 + z1 + z2

    return [
        (t10 + t3) >> out_shift,
        (t11 + t2) >> out_shift,
        (t12 + t1) >> out_shift,
        (t13 + t0) >> out_shift,
        (t13 - t0) >> out_shift,
        (t12 - t1) >> out_shift,
        (t11 - t2) >> out_shift,
        (t10 - t3) >> out_shift,
    ]


def integer_idct_samples(blocks, table):
    """Dequantize and inverse-transform integer blocks to [0, 255] samples.

    ``blocks`` is (..., 8, 8) int; ``table`` an (8, 8) integer quantization
    table.  Returns samples of the same shape, level shift undone.
    """
    shape = blocks.shape
    c = blocks.reshape(-1, 64).astype(np.int64)
    q = np.asarray(table, dtype=np.int64).reshape(64)

    ws = [None] * 64
    for i in range(8):
        col = [c[:, 8 * r + i] * q[8 * r + i] for r in range(8)]
        out = _idct_1d(col, 1024, 11)
        for r in range(8):
            ws[8 * r + i] = out[r]
    samples = np.empty_like(c)
    for i in range(0, 64, 8):
        row = [ws[i + j] for j in range(8)]
        out = _idct_1d(row, 16 << 13, 18)
        for j in range(8):
            samples[:, i + j] = out[j]

    return np.clip(samples + 128, 0, 255).reshape(shape)


def ycbcr_samples_to_rgb(y, cb, cr):
    """Fixed-point BT.601 conversion of integer [0, 255] planes to RGB bytes."""
    y = y.astype(np.int64)
    cbc = cb.astype(np.int64) - 128
    crc = cr.astype(np.int64) - 128
    half = 1 << 15
    r = y + ((91881 * crc + half) >> 16)
    g = y + ((-22554 * cbc - 46802 * crc + half) >> 16)
    b = y + ((116130 * cbc + half) >> 16)
    return np.clip(np.stack([r, g, b], axis=-1), 0, 255).astype(np.uint8)
