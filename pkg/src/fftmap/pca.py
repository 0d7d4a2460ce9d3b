"""PCA of the spectrum stack, scree construction and elbow candidates.

The scree is the list of explained-variance ratios s_i^2 / sum_j s_j^2 of
the column-centered stack. Elbow candidates are local maxima of the
gradient of log10(ratio): a maximum at gap j (between components j and
j+1) proposes k = j, i.e. the flattening begins after component j.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .window_fft import SpectrumStack

# below this size the exact economy SVD is cheap; above it a seeded
# randomized range finder keeps large sweeps tractable
_EXACT_SVD_LIMIT = 4000
_RSVD_SEED = 0
_RSVD_OVERSAMPLE = 10
_RSVD_POWER_ITER = 4


@dataclass
class ScreeData:
    """Explained-variance spectrum plus elbow candidates."""

    variance_ratio: np.ndarray  # descending, > 0
    mean: np.ndarray  # column means of X
    axes: np.ndarray  # (n_computed, d) orthonormal principal directions
    candidates: list  # ascending candidate component counts
    auto_k: int
    no_candidates_warning: bool = False
    smoothed: bool = False

    @property
    def n_computed(self) -> int:
        return len(self.variance_ratio)


def fit_pca(stack, n_keep=30, smooth=False) -> ScreeData:
    """PCA of the (centered) stack via SVD, keeping n_keep components.

    Deterministic: the sign of each axis is fixed by making its
    largest-magnitude entry positive.
    """
    X = stack.X if isinstance(stack, SpectrumStack) else np.asarray(stack, dtype=np.float64)
    if n_keep < 1:
        raise ParameterError(f"n_keep must be >= 1, got {n_keep}")
    n, d = X.shape
    if n < 2:
        raise InsufficientDataError(f"PCA needs at least 2 windows, got {n}")
    mean = X.mean(axis=0)
    n_keep = min(n_keep, n, d)

    if min(n, d) <= _EXACT_SVD_LIMIT:
        Xc = X - mean
        total = float(np.sum(Xc * Xc))
        _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
        s, Vt = s[:n_keep], Vt[:n_keep]
    else:
        # total variance does not need the SVD
        total = float(np.sum(X * X) - n * np.sum(mean * mean))
        s, Vt = _randomized_svd_centered(X, mean, n_keep)

    if total <= 0.0:
        raise InsufficientDataError("stack has zero variance; nothing to decompose")
    ratios = (s * s) / total
    keep = ratios > 1e-14  # drop numerically-zero directions past the rank
    ratios, Vt = ratios[keep], Vt[keep]

    # sign convention: largest-|entry| of each axis made positive
    flip = Vt[np.arange(len(Vt)), np.argmax(np.abs(Vt), axis=1)] < 0
    Vt = Vt * np.where(flip, -1.0, 1.0)[:, None]

    scree = ScreeData(
        variance_ratio=ratios,
        mean=mean,
        axes=Vt,
        candidates=[],
        auto_k=1,
        smoothed=smooth,
    )
    scree.candidates = scree_candidates(scree, smooth=smooth)
    scree.auto_k = auto_k(scree)
    return scree


def scree_candidates(scree: ScreeData, smooth=False) -> list:
    """Local maxima of the gradient of the log10 scree.

    With L[j] = log10(ratio_j) (1-based) and gaps g[j] = L[j+1] - L[j],
    candidate counts are the j >= 2 where g[j] > g[j-1] and g[j] >= g[j+1]
    (plateaus contribute their smallest j; the last gap has no right
    neighbor and only needs the left condition).
    """
    m = scree.n_computed
    if m < 3:
        return []
    L = np.log10(scree.variance_ratio)
    if smooth:
        inner = np.convolve(L, np.ones(3) / 3.0, mode="valid")
        L = np.concatenate([[L[0]], inner, [L[-1]]])
    g = np.diff(L)  # g[i] is the gap after component i+1 (0-based i)
    tol = 1e-9  # tie tolerance so float noise cannot fake a maximum
    cands = []
    for i in range(1, len(g)):
        right_ok = i == len(g) - 1 or g[i] >= g[i + 1] - tol
        if g[i] > g[i - 1] + tol and right_ok:
            cands.append(i + 1)  # 1-based gap index = candidate k
    return cands


def auto_k(scree: ScreeData) -> int:
    """Smallest elbow candidate; 1 (with a warning flag) when none exist."""
    if scree.candidates:
        scree.no_candidates_warning = False
        return scree.candidates[0]
    scree.no_candidates_warning = True
    return 1


def _randomized_svd_centered(X, mean, k):
    """Top-k SVD of (X - mean) without materializing the centered matrix.

    Seeded Halko-style range finder with power iterations; deterministic
    run to run.
    """
    n, d = X.shape
    rng = np.random.default_rng(_RSVD_SEED)
    l = min(k + _RSVD_OVERSAMPLE, n, d)
    G = rng.standard_normal((d, l))

    def mul(V):  # (X - 1 mean^T) @ V
        return X @ V - np.outer(np.ones(n), mean @ V)

    def tmul(U):  # (X - 1 mean^T)^T @ U
        return X.T @ U - np.outer(mean, U.sum(axis=0))

    Q = np.linalg.qr(mul(G))[0]
    for _ in range(_RSVD_POWER_ITER):
        Q = np.linalg.qr(tmul(Q))[0]
        Q = np.linalg.qr(mul(Q))[0]
    B = tmul(Q).T  # (l, d)
    _, s, Vt = np.linalg.svd(B, full_matrices=False)
    return s[:k], Vt[:k]
