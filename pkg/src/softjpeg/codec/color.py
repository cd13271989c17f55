"""Full-range BT.601 color transforms between RGB and YCbCr."""

import numpy as np

# Forward matrix rows are (Y, Cb, Cr) weights for (R, G, B).
_FWD = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168735892, -0.331264108, 0.5],
        [0.5, -0.418687589, -0.081312411],
    ]
)
_OFFSET = np.array([0.0, 128.0, 128.0])
_INV = np.linalg.inv(_FWD)

# Inverse rows exposed for code that rebuilds the transform channel-wise.
RGB_FROM_YCBCR = _INV


def rgb_to_ycbcr(rgb):
    """Convert an (H, W, 3) RGB raster to float64 YCbCr planes, clamped to [0, 255].

    The result keeps full float precision; rounding to bytes happens only
    when a caller needs an 8-bit raster.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    ycc = rgb @ _FWD.T + _OFFSET
    return np.clip(ycc, 0.0, 255.0)


def ycbcr_to_rgb(ycc):
    """Convert float YCbCr planes back to an (H, W, 3) uint8 RGB raster."""
    ycc = np.asarray(ycc, dtype=np.float64)
    rgb = (ycc - _OFFSET) @ _INV.T
    return np.clip(np.rint(rgb), 0.0, 255.0).astype(np.uint8)


def ycbcr_to_rgb_float(ycc):
    """Same transform as :func:`ycbcr_to_rgb` but without rounding or clamping."""
    ycc = np.asarray(ycc, dtype=np.float64)
    return (ycc - _OFFSET) @ _INV.T
