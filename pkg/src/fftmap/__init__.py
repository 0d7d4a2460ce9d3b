"""Automatic image texture analysis: moving-window FFT + PCA + blind NMF."""

__version__ = "0.1.0"

from .image_io import GrayImage, load_image, rescale_width, save_image, to_grayscale
from .window_fft import (SpectrumStack, WindowGrid, build_dataset, hann2d,
                         plan_grid, power_spectrum)
from .pca import ScreeData, auto_k, fit_pca, scree_candidates
from .nmf import (Decomposition, nmf_fit, nndsvd_init, order_components,
                  reshape_outputs)
from .characterize import (PeakInfo, SweepRow, find_peak, physical_spacing,
                           sweep_elemsize)
from .pipeline import RunConfig, run_batch, run_single
