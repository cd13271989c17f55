import numpy as np
import pytest


def make_natural_image(height, width, seed=7):
    """Synthetic but photo-like test content: smooth color gradients,
    low-frequency blotches, and mild sensor-style noise."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for c in range(3):
        base = (
            110
            + 70 * np.sin(2 * np.pi * (xx * (c + 1) / width * 1.7 + yy / height * 0.9 + 0.3 * c))
            + 45 * np.cos(2 * np.pi * (yy * (2 - 0.5 * c) / height + xx / width * 0.35))
        )
        blob = rng.normal(0, 1, (height // 16 + 1, width // 16 + 1))
        blob = np.kron(blob, np.ones((16, 16)))[:height, :width]
        img[:, :, c] = base + 18 * blob + rng.normal(0, 4, (height, width))
    return np.clip(img, 0, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def natural_image():
    return make_natural_image


@pytest.fixture(scope="session")
def small_image():
    return make_natural_image(120, 184, seed=7)
