"""Quantitative read-out of factor spectra and the window-size sweep.

The dominant off-DC peak of a factor gives the characteristic spacing
elemsize / radius (in window pixels) and the peak direction, reported
clockwise from the horizontal with antipodal peaks identified (angles in
[0, 180)). Physical spacings follow by multiplying with the pixel size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFactorError, GeometryError, ParameterError
from . import pca, window_fft

# annulus half-width (bins) used when sampling the peak radius
_RING_TOL = 0.5
# angular max/mean below this reads as a ring (isotropic) pattern
_ISOTROPY_RATIO = 2.0


@dataclass
class PeakInfo:
    """Dominant off-center peak of one factor spectrum."""

    radius_bins: float
    angle_deg: float  # [0, 180), clockwise from horizontal
    spacing_window_px: float
    spacing_nm: float | None
    peak_value: float
    isotropy_flag: bool


@dataclass
class SweepRow:
    """One window-size sweep entry."""

    elemsize: int
    auto_k: int
    candidates: list
    error: str | None = None


def find_peak(factor, dc_exclusion_radius=3, pixel_size_nm=None,
              isotropy_ratio=_ISOTROPY_RATIO) -> PeakInfo:
    """Locate the dominant peak outside the DC exclusion disk."""
    factor = np.asarray(factor, dtype=np.float64)
    if factor.ndim != 2 or factor.shape[0] != factor.shape[1]:
        raise GeometryError(f"factor must be square, got shape {factor.shape}")
    if dc_exclusion_radius < 1:
        raise ParameterError(f"dc_exclusion_radius must be >= 1, got {dc_exclusion_radius}")
    n = factor.shape[0]
    c = n // 2
    dy = np.arange(n)[:, None] - c
    dx = np.arange(n)[None, :] - c
    dist = np.hypot(dy, dx)
    outside = dist > dc_exclusion_radius
    if not np.any(factor[outside] > 0):
        raise DegenerateFactorError("factor has no signal outside the DC exclusion disk")

    masked = np.where(outside, factor, -np.inf)
    iy, ix = np.unravel_index(np.argmax(masked), factor.shape)
    off_y, off_x = iy - c, ix - c
    radius = float(np.hypot(off_y, off_x))
    angle = float(np.degrees(np.arctan2(off_y, off_x)) % 180.0)

    ring = np.abs(dist - radius) <= _RING_TOL
    ring_vals = factor[ring & outside]
    ring_mean = float(ring_vals.mean())
    isotropic = ring_mean > 0 and float(ring_vals.max()) / ring_mean < isotropy_ratio

    spacing = n / radius
    return PeakInfo(
        radius_bins=radius,
        angle_deg=angle,
        spacing_window_px=spacing,
        spacing_nm=None if pixel_size_nm is None else physical_spacing(spacing, pixel_size_nm),
        peak_value=float(factor[iy, ix]),
        isotropy_flag=isotropic,
    )


def physical_spacing(spacing_window_px, pixel_size_nm):
    """Characteristic spacing in nm."""
    if spacing_window_px <= 0 or pixel_size_nm <= 0:
        raise ParameterError("spacing and pixel size must be positive")
    return spacing_window_px * pixel_size_nm


def sweep_elemsize(img, sizes, xstep, ystep, n_scree=30):
    """Component-count estimate as a function of window size.

    Each size runs grid -> dataset -> PCA independently; a failing size is
    recorded in its row and the sweep continues.
    """
    if len(set(sizes)) != len(sizes):
        raise ParameterError("sweep sizes must be distinct")
    rows = []
    for size in sizes:
        try:
            grid = window_fft.plan_grid(img.width, img.height, size, xstep, ystep)
            stack = window_fft.build_dataset(img, grid)
            scree = pca.fit_pca(stack, n_keep=n_scree)
            rows.append(SweepRow(elemsize=size, auto_k=scree.auto_k,
                                 candidates=list(scree.candidates)))
        except Exception as e:  # row isolation: record and continue
            rows.append(SweepRow(elemsize=size, auto_k=0, candidates=[], error=str(e)))
    return rows
