"""Orthonormal 8x8 type-II DCT and its inverse.

The basis matrix D satisfies D @ D.T == I, so fdct(x) = D x D^T and
idct(c) = D^T c D invert each other exactly up to float64 rounding.
"""

import numpy as np

from .blocks import BLOCK


def _basis():
    u = np.arange(BLOCK)[:, None]
    x = np.arange(BLOCK)[None, :]
    d = 0.5 * np.cos((2 * x + 1) * u * np.pi / (2 * BLOCK))
    d[0, :] *= 1.0 / np.sqrt(2.0)
    return d


DCT_MATRIX = _basis()

# Flattened-block operators: row-major vec(b) @ FDCT_FLAT == vec(D b D^T).
FDCT_FLAT = np.kron(DCT_MATRIX.T, DCT_MATRIX.T)
IDCT_FLAT = np.kron(DCT_MATRIX, DCT_MATRIX)


def fdct_block(block):
    return DCT_MATRIX @ np.asarray(block, dtype=np.float64) @ DCT_MATRIX.T


def idct_block(coeffs):
    return DCT_MATRIX.T @ np.asarray(coeffs, dtype=np.float64) @ DCT_MATRIX


def fdct_blocks(blocks):
    """Apply the forward DCT to every 8x8 block of a (..., 8, 8) array."""
    return np.einsum("ux,...xy,vy->...uv", DCT_MATRIX, blocks, DCT_MATRIX, optimize=True)


def idct_blocks(coeffs):
    return np.einsum("ux,...uv,vy->...xy", DCT_MATRIX, coeffs, DCT_MATRIX, optimize=True)
