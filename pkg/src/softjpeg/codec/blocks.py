"""Plane <-> 8x8 block conversion with edge-replication padding and level shift."""

from dataclasses import dataclass

import numpy as np

BLOCK = 8
LEVEL_SHIFT = 128.0


@dataclass
class CoefficientGrid:
    """Per-channel grid of 8x8 coefficient blocks.

    ``blocks`` has shape (rows, cols, 8, 8); real-valued before quantization,
    integer afterwards.  ``height``/``width`` are the unpadded plane size.
    """

    channel: str  # one of "Y", "Cb", "Cr"
    blocks: np.ndarray
    height: int
    width: int

    def __post_init__(self):
        if self.blocks.ndim != 4 or self.blocks.shape[2:] != (BLOCK, BLOCK):
            raise ValueError(f"expected (rows, cols, 8, 8) blocks, got {self.blocks.shape}")
        rows = -(-self.height // BLOCK)
        cols = -(-self.width // BLOCK)
        if self.blocks.shape[:2] != (rows, cols):
            raise ValueError(
                f"block grid {self.blocks.shape[:2]} does not cover a "
                f"{self.height}x{self.width} plane"
            )


def pad_to_blocks(plane):
    """Pad a plane to multiples of 8 by replicating the last row/column."""
    h, w = plane.shape
    ph = (-h) % BLOCK
    pw = (-w) % BLOCK
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane


def partition_plane(plane):
    """Split a plane into level-shifted 8x8 blocks of shape (rows, cols, 8, 8)."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.size == 0:
        raise ValueError("cannot partition an empty plane")
    padded = pad_to_blocks(plane) - LEVEL_SHIFT
    ph, pw = padded.shape
    return padded.reshape(ph // BLOCK, BLOCK, pw // BLOCK, BLOCK).transpose(0, 2, 1, 3)


def assemble_plane(blocks, height, width):
    """Inverse of :func:`partition_plane`: unshift, stitch and crop to size."""
    rows, cols = blocks.shape[:2]
    plane = blocks.transpose(0, 2, 1, 3).reshape(rows * BLOCK, cols * BLOCK)
    return plane[:height, :width] + LEVEL_SHIFT
