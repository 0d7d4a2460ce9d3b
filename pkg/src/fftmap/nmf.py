"""Blind non-negative factorization of the spectrum stack.

X (n_windows x d) is factored as W @ H with W, H >= 0 by alternating
multiplicative updates on the half squared Frobenius objective,
initialized deterministically from the truncated SVD (NNDSVD with
mean-filled zeros so no entry can stall at zero). No randomness anywhere:
identical inputs give bit-identical factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, NumericalError, ParameterError
from .pca import _EXACT_SVD_LIMIT, _randomized_svd_centered
from .window_fft import WindowGrid

_EPS = 1e-12


@dataclass
class Decomposition:
    """NMF result: spatial loadings W and spectral factors H."""

    k: int
    W: np.ndarray  # (n_windows, k)
    H: np.ndarray  # (k, d)
    objective_trace: list  # 0.5 * ||X - WH||_F^2 per iteration (index 0 = init)
    iterations_run: int
    converged: bool


def nndsvd_init(X, k):
    """NNDSVDa initial factors from the leading k singular triplets.

    For each triplet the positive/negative parts of (u, v) compete; the
    pair with the larger norm product survives, scaled so the component
    carries its singular value. Zero entries are then replaced by the mean
    of X, so W0 and H0 are strictly positive.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if not 1 <= k <= min(n, d):
        raise ParameterError(f"k must be in [1, {min(n, d)}], got {k}")
    if X.min() < 0:
        raise ParameterError("NMF input must be non-negative")

    U, s, Vt = _truncated_svd(X, k)
    W = np.zeros((n, k))
    H = np.zeros((k, d))

    # leading triplet of a non-negative matrix is non-negative up to sign
    u0, v0 = np.abs(U[:, 0]), np.abs(Vt[0])
    W[:, 0] = np.sqrt(s[0]) * u0
    H[0] = np.sqrt(s[0]) * v0

    for j in range(1, k):
        u, v = U[:, j], Vt[j]
        up, un = np.maximum(u, 0.0), np.maximum(-u, 0.0)
        vp, vn = np.maximum(v, 0.0), np.maximum(-v, 0.0)
        up_n, un_n = np.linalg.norm(up), np.linalg.norm(un)
        vp_n, vn_n = np.linalg.norm(vp), np.linalg.norm(vn)
        if up_n * vp_n >= un_n * vn_n:
            sigma, uu, vv = up_n * vp_n, up / max(up_n, _EPS), vp / max(vp_n, _EPS)
        else:
            sigma, uu, vv = un_n * vn_n, un / max(un_n, _EPS), vn / max(vn_n, _EPS)
        W[:, j] = np.sqrt(s[j] * sigma) * uu
        H[j] = np.sqrt(s[j] * sigma) * vv

    fill = X.mean()
    W[W <= 0.0] = fill
    H[H <= 0.0] = fill
    return W, H


def nmf_fit(X, k, max_iter=200, tol=1e-4) -> Decomposition:
    """Multiplicative-update NMF from the NNDSVDa start.

    Stops when the relative objective change drops below tol or after
    max_iter iterations. The reconstruction W @ H is never materialized;
    the objective is tracked through the k x d / k x k Gram products.
    """
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ParameterError("NMF input must be finite")
    W, H = nndsvd_init(X, k)
    norm_x2 = float(np.sum(X * X))

    trace = [_objective(X, W, H, norm_x2)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        WtX = W.T @ X
        WtW = W.T @ W
        H *= WtX / (WtW @ H + _EPS)
        XHt = X @ H.T
        HHt = H @ H.T
        W *= XHt / (W @ HHt + _EPS)

        # <X, WH> = <XH^T, W>, reusing XHt instead of streaming X again
        cross = float(np.sum(W * XHt))
        gram = float(np.sum((W.T @ W) * HHt))
        obj = 0.5 * max(norm_x2 - 2.0 * cross + gram, 0.0)
        if not np.isfinite(obj):
            raise NumericalError(f"non-finite objective at iteration {it}", iteration=it)
        prev = trace[-1]
        trace.append(obj)
        if prev > 0 and abs(prev - obj) / prev < tol:
            converged = True
            break
    return Decomposition(k=k, W=W, H=H, objective_trace=trace,
                         iterations_run=it, converged=converged)


def _objective(X, W, H, norm_x2):
    # 0.5*||X - WH||^2 = 0.5*(||X||^2 - 2<W^T X, H> + <W^T W, H H^T>)
    WtX = W.T @ X
    cross = float(np.sum(WtX * H))
    gram = float(np.sum((W.T @ W) * (H @ H.T)))
    return 0.5 * max(norm_x2 - 2.0 * cross + gram, 0.0)


def order_components(dec: Decomposition) -> Decomposition:
    """Sort components by descending loading energy; W @ H is unchanged."""
    energy = np.sum(dec.W * dec.W, axis=0) * np.sum(dec.H * dec.H, axis=1)
    order = np.argsort(-energy, kind="stable")
    return Decomposition(
        k=dec.k,
        W=dec.W[:, order],
        H=dec.H[order],
        objective_trace=dec.objective_trace,
        iterations_run=dec.iterations_run,
        converged=dec.converged,
    )


def reshape_outputs(dec: Decomposition, grid: WindowGrid):
    """Unfold loadings to grid maps and factors to spectrum images.

    Returns (maps: k x ny x nx, factors: k x elemsize x elemsize).
    """
    n = grid.elemsize
    if dec.W.shape[0] != grid.n_windows:
        raise GeometryError(
            f"loadings have {dec.W.shape[0]} rows but grid has {grid.n_windows} windows"
        )
    if dec.H.shape[1] != n * n:
        raise GeometryError(
            f"factors have {dec.H.shape[1]} columns but elemsize^2 is {n * n}"
        )
    maps = dec.W.T.reshape(dec.k, grid.ny, grid.nx)
    factors = dec.H.reshape(dec.k, n, n)
    return maps, factors


def _truncated_svd(X, k):
    n, d = X.shape
    if min(n, d) <= _EXACT_SVD_LIMIT:
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
        return U[:, :k], s[:k], Vt[:k]
    zero = np.zeros(d)
    s, Vt = _randomized_svd_centered(X, zero, k)
    # recover U from the right factors
    U = X @ Vt.T / np.maximum(s, _EPS)
    return U, s, Vt
