"""Image loading, grayscale conversion and width rescaling.

Images are kept as raw real-valued intensities: integer samples are
promoted to float without normalization (a 16-bit value 65535 loads
as 65535.0). All downstream results are built from power-spectrum
ratios and argmax decisions, which are intensity-scale invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, GeometryError

# Rec. 709 luma weights (sum to 1 exactly)
LUMA_R = 0.2126
LUMA_G = 0.7152
LUMA_B = 0.0722

_SUPPORTED_SUFFIXES = {".tif", ".tiff", ".png", ".jpg", ".jpeg", ".bmp"}


@dataclass
class GrayImage:
    """A 2D grayscale intensity image with optional physical pixel size."""

    data: np.ndarray  # (height, width) float64
    pixel_size_nm: float | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise GeometryError(f"expected 2D image data, got shape {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise GeometryError(f"degenerate image shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise FormatError("image contains non-finite intensities")
        if self.pixel_size_nm is not None and not self.pixel_size_nm > 0:
            raise FormatError(f"pixel_size_nm must be positive, got {self.pixel_size_nm}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def to_grayscale(r, g, b):
    """Rec. 709 luma of an RGB triple (or arrays of channels)."""
    return LUMA_R * np.asarray(r, dtype=np.float64) \
        + LUMA_G * np.asarray(g, dtype=np.float64) \
        + LUMA_B * np.asarray(b, dtype=np.float64)


def load_image(path, pixel_size_nm=None) -> GrayImage:
    """Load a TIFF/PNG/JPEG/BMP file as a GrayImage.

    Color inputs are converted with the Rec. 709 luma weights; grayscale
    integer samples are promoted to float without rescaling.
    """
    path = Path(path)
    if not path.exists():
        raise IOError(f"no such file: {path}")
    if path.suffix.lower() not in _SUPPORTED_SUFFIXES:
        raise FormatError(f"unsupported file extension {path.suffix!r} for {path}")
    try:
        with Image.open(path) as im:
            im.load()
            arr = _decode(im, path)
    except UnidentifiedImageError as e:
        raise FormatError(f"cannot decode {path}: {e}") from e
    except OSError as e:
        # Pillow raises OSError for truncated/corrupt streams
        raise FormatError(f"corrupt or truncated image {path}: {e}") from e
    return GrayImage(arr, pixel_size_nm=pixel_size_nm)


def _decode(im, path):
    mode = im.mode
    if mode in ("L", "I", "I;16", "I;16B", "I;16L", "F"):
        arr = np.asarray(im, dtype=np.float64)
    elif mode in ("RGB", "RGBA", "P", "LA"):
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
        arr = to_grayscale(rgb[..., 0], rgb[..., 1], rgb[..., 2])
    else:
        raise FormatError(f"unsupported image mode {mode!r} in {path}")
    if arr.ndim != 2:
        raise FormatError(f"expected a single-channel image in {path}, got shape {arr.shape}")
    return arr


def save_image(img: GrayImage, path):
    """Write a GrayImage as a single-page 32-bit float TIFF."""
    Image.fromarray(img.data.astype(np.float32), mode="F").save(str(path))


def rescale_width(img: GrayImage, target_width: int) -> GrayImage:
    """Bilinear resample to the given width, preserving aspect ratio.

    pixel_size_nm is rescaled by width/target_width so the physical
    extent of the image is unchanged.
    """
    if target_width < 2:
        raise GeometryError(f"target width must be >= 2, got {target_width}")
    h, w = img.data.shape
    target_height = int(round(h * target_width / w))
    if target_height < 2:
        raise GeometryError(
            f"rescale of {w}x{h} to width {target_width} gives degenerate height {target_height}"
        )
    if target_width == w and target_height == h:
        out = img.data.copy()
    else:
        out = _bilinear(img.data, target_height, target_width)
    pix = None
    if img.pixel_size_nm is not None:
        pix = img.pixel_size_nm * w / target_width
    return GrayImage(out, pixel_size_nm=pix)


def _bilinear(data, out_h, out_w):
    """Separable bilinear resample with corner alignment and edge clamping."""
    in_h, in_w = data.shape
    out = _interp_axis(data, out_w, axis=1)
    out = _interp_axis(out, out_h, axis=0)
    assert out.shape == (out_h, out_w)
    return out


def _interp_axis(data, out_n, axis):
    in_n = data.shape[axis]
    if in_n == out_n:
        return data
    if in_n == 1:
        reps = [1, 1]
        reps[axis] = out_n
        return np.tile(data, reps)
    # corner-aligned sample positions, clamped to the valid range
    pos = np.arange(out_n) * (in_n - 1) / (out_n - 1)
    i0 = np.clip(np.floor(pos).astype(np.intp), 0, in_n - 2)
    frac = pos - i0
    moved = np.moveaxis(data, axis, 0)
    vals = moved[i0] * (1.0 - frac)[:, None] + moved[i0 + 1] * frac[:, None]
    return np.moveaxis(vals, 0, axis)
