import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fftmap.image_io import GrayImage


def two_texture_image(size=1024, period=8, amplitude=100.0, noise=5.0, seed=0):
    """Left half vertical stripes, right half horizontal stripes."""
    rng = np.random.default_rng(seed)
    t = np.arange(size)
    wave = amplitude * np.cos(2.0 * np.pi * t / period)
    img = np.empty((size, size))
    half = size // 2
    img[:, :half] = wave[None, :half]                    # varies along x
    img[:, half:] = np.tile(wave[:, None], (1, size - half))  # varies along y
    img += rng.normal(0.0, noise, img.shape)
    return GrayImage(img)


def three_texture_image(size=1024, amplitude=100.0, noise=5.0, seed=0,
                        band=128):
    """Cycling vertical bands: vertical p8, horizontal p8, vertical p24.

    The two-texture image enriched with a period-24 texture; the band
    layout mixes all three textures at every scale so mid-size windows
    resolve the most structure.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(size)
    w8 = amplitude * np.cos(2.0 * np.pi * t / 8)
    w24 = amplitude * np.cos(2.0 * np.pi * t / 24)
    textures = [
        np.tile(w8[None, :], (size, 1)),   # vertical stripes, period 8
        np.tile(w8[:, None], (1, size)),   # horizontal stripes, period 8
        np.tile(w24[None, :], (size, 1)),  # vertical stripes, period 24
    ]
    img = np.empty((size, size))
    for i, x0 in enumerate(range(0, size, band)):
        x1 = min(x0 + band, size)
        img[:, x0:x1] = textures[i % 3][:, x0:x1]
    img += rng.normal(0.0, noise, img.shape)
    return GrayImage(img)


@pytest.fixture(scope="session")
def two_texture():
    return two_texture_image()


@pytest.fixture(scope="session")
def three_texture():
    return three_texture_image()
