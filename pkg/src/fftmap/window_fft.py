"""Moving-window grid, Hann-windowed power spectra and the unfolded dataset.

Each square window of side `elemsize` is tapered by a 2D Hann window,
transformed by an unnormalized 2D DFT and squared; the DC bin ends up at
the center index (elemsize//2, elemsize//2). Flattening every spectrum to
a row yields the n_windows x elemsize^2 non-negative matrix consumed by
PCA and NMF.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, ParameterError
from .image_io import GrayImage

# windows per FFT batch; bounds scratch memory for large grids
_FFT_CHUNK = 128


@dataclass
class WindowGrid:
    """Window origins and geometry of the moving-window scan."""

    elemsize: int
    xstep: int
    ystep: int
    xs: np.ndarray  # ascending x-origins
    ys: np.ndarray  # ascending y-origins

    @property
    def nx(self) -> int:
        return len(self.xs)

    @property
    def ny(self) -> int:
        return len(self.ys)

    @property
    def n_windows(self) -> int:
        return self.nx * self.ny


@dataclass
class SpectrumStack:
    """Unfolded 4D dataset: one flattened power spectrum per grid window.

    Row w = gy*nx + gx holds the spectrum of the window at
    (xs[gx], ys[gy]), flattened row-major.
    """

    X: np.ndarray  # (n_windows, elemsize**2) non-negative
    grid: WindowGrid

    @property
    def n_windows(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def plan_grid(width, height, elemsize, xstep, ystep) -> WindowGrid:
    """Lay out window origins so fully-contained windows cover the image.

    Origins advance by the step; a final clamped origin is appended per
    axis when needed so the last window touches the image edge.
    """
    if elemsize > width:
        raise GeometryError(f"elemsize {elemsize} exceeds image width {width}")
    if elemsize > height:
        raise GeometryError(f"elemsize {elemsize} exceeds image height {height}")
    if elemsize < 8:
        raise ParameterError(f"elemsize must be >= 8, got {elemsize}")
    if xstep < 1 or ystep < 1:
        raise ParameterError(f"steps must be >= 1, got xstep={xstep} ystep={ystep}")
    return WindowGrid(
        elemsize=elemsize,
        xstep=xstep,
        ystep=ystep,
        xs=_origins(width, elemsize, xstep),
        ys=_origins(height, elemsize, ystep),
    )


def _origins(extent, elemsize, step):
    last = extent - elemsize
    xs = list(range(0, last + 1, step))
    if xs[-1] != last:
        xs.append(last)
    return np.asarray(xs, dtype=np.intp)


def hann2d(n: int) -> np.ndarray:
    """Outer product of the symmetric Hann vector (endpoints zero)."""
    if n < 2:
        raise ParameterError(f"Hann window size must be >= 2, got {n}")
    w = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / (n - 1)))
    return np.outer(w, w)


def power_spectrum(roi, window) -> np.ndarray:
    """Center-shifted |DFT2(roi * window)|^2, unnormalized convention."""
    roi = np.asarray(roi, dtype=np.float64)
    tapered = roi * window
    spec = np.abs(np.fft.fft2(tapered)) ** 2
    return np.fft.fftshift(spec)


def build_dataset(img: GrayImage, grid: WindowGrid) -> SpectrumStack:
    """Compute the power spectrum of every grid window.

    Deterministic: row order is fixed by the grid and the per-window FFTs
    are independent of batch boundaries.
    """
    n = grid.elemsize
    if grid.xs[-1] + n > img.width or grid.ys[-1] + n > img.height:
        raise GeometryError(
            f"grid ({grid.xs[-1] + n}x{grid.ys[-1] + n}) exceeds image "
            f"({img.width}x{img.height})"
        )
    window = hann2d(n)
    X = np.empty((grid.n_windows, n * n), dtype=np.float64)
    rois = np.empty((min(_FFT_CHUNK, grid.n_windows), n, n), dtype=np.float64)
    row = 0
    buf = 0
    for y in grid.ys:
        for x in grid.xs:
            rois[buf] = img.data[y:y + n, x:x + n]
            buf += 1
            if buf == rois.shape[0]:
                row = _flush(X, rois[:buf], window, row)
                buf = 0
    if buf:
        row = _flush(X, rois[:buf], window, row)
    assert row == grid.n_windows
    return SpectrumStack(X=X, grid=grid)


def _flush(X, rois, window, row):
    spec = np.abs(np.fft.fft2(rois * window, axes=(-2, -1))) ** 2
    spec = np.fft.fftshift(spec, axes=(-2, -1))
    X[row:row + len(rois)] = spec.reshape(len(rois), -1)
    return row + len(rois)
