import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fftmap.errors import InsufficientDataError
from fftmap.pca import ScreeData, auto_k, fit_pca, scree_candidates


def scree_from_log(logs):
    """Build a ScreeData carrying exactly the given log10 variance ratios."""
    ratios = np.power(10.0, np.asarray(logs, dtype=np.float64))
    return ScreeData(variance_ratio=ratios, mean=np.zeros(1),
                     axes=np.zeros((len(ratios), 1)), candidates=[], auto_k=1)


class TestFitPca:
    def test_rank_one(self):
        rng = np.random.default_rng(0)
        row = rng.random(30)
        X = np.outer(np.array([1.0, 2.0, 3.0, 5.0]), row)
        scree = fit_pca(X, n_keep=4)
        assert len(scree.variance_ratio) == 1
        assert scree.variance_ratio[0] == pytest.approx(1.0, rel=1e-12)

    def test_two_known_variances(self):
        # two orthogonal centered directions with variances 4 and 1
        a = np.array([2.0, -2.0, 0.0, 0.0])
        b = np.array([0.0, 0.0, 1.0, -1.0])
        e1 = np.zeros(10); e1[0] = 1.0
        e2 = np.zeros(10); e2[1] = 1.0
        X = np.outer(a, e1) + np.outer(b, e2)
        scree = fit_pca(X, n_keep=4)
        assert scree.variance_ratio[:2] == pytest.approx([0.8, 0.2], rel=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        X = rng.random((20, 15))
        s1 = fit_pca(X, n_keep=10)
        s2 = fit_pca(9.0 * X, n_keep=10)
        assert np.allclose(s1.variance_ratio, s2.variance_ratio, rtol=1e-10)
        assert s1.candidates == s2.candidates
        assert s1.auto_k == s2.auto_k

    def test_ratios_nonincreasing_and_sum_one(self):
        rng = np.random.default_rng(2)
        X = rng.random((20, 50))
        scree = fit_pca(X, n_keep=20)
        r = scree.variance_ratio
        assert np.all(np.diff(r) <= 1e-15)
        assert r.sum() == pytest.approx(1.0, rel=1e-9)

    def test_matches_covariance_eig_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            X = rng.random((20, 50))
            scree = fit_pca(X, n_keep=20)
            expected = oracles.pca_variance_ratios(X)[:len(scree.variance_ratio)]
            assert np.allclose(scree.variance_ratio, expected, atol=1e-8)

    def test_axes_orthonormal(self):
        rng = np.random.default_rng(4)
        scree = fit_pca(rng.random((15, 40)), n_keep=8)
        G = scree.axes @ scree.axes.T
        assert np.allclose(G, np.eye(len(scree.axes)), atol=1e-8)

    def test_full_rank_reconstruction(self):
        rng = np.random.default_rng(5)
        X = rng.random((12, 9))
        scree = fit_pca(X, n_keep=12)
        Xc = X - scree.mean
        proj = (Xc @ scree.axes.T) @ scree.axes
        err = np.linalg.norm(proj - Xc) / np.linalg.norm(Xc)
        assert err <= 1e-6

    def test_sign_convention_deterministic(self):
        rng = np.random.default_rng(6)
        X = rng.random((10, 20))
        s1 = fit_pca(X, n_keep=5)
        s2 = fit_pca(X.copy(), n_keep=5)
        assert np.array_equal(s1.axes, s2.axes)
        for ax in s1.axes:
            assert ax[np.argmax(np.abs(ax))] > 0

    def test_randomized_path_matches_exact(self, monkeypatch):
        import fftmap.pca as pca_mod
        rng = np.random.default_rng(7)
        # low-rank plus tiny noise so the randomized range finder is accurate
        X = rng.random((60, 8)) @ rng.random((8, 120)) \
            + 1e-8 * rng.random((60, 120))
        exact = fit_pca(X, n_keep=8)
        monkeypatch.setattr(pca_mod, "_EXACT_SVD_LIMIT", 1)
        approx = fit_pca(X, n_keep=8)
        assert np.allclose(approx.variance_ratio[:5], exact.variance_ratio[:5],
                           rtol=1e-6)

    def test_insufficient_windows(self):
        with pytest.raises(InsufficientDataError):
            fit_pca(np.ones((1, 5)), n_keep=1)


class TestScreeCandidates:
    def test_single_elbow(self):
        scree = scree_from_log([0, -1, -2, -3, -3, -3])
        assert scree_candidates(scree) == [4]

    def test_geometric_decay_no_candidates(self):
        scree = scree_from_log([0, -0.7, -1.4, -2.1, -2.8, -3.5])
        assert scree_candidates(scree) == []

    def test_two_plateaus(self):
        scree = scree_from_log([0, -2, -2.1, -4, -4.1, -4.2])
        assert scree_candidates(scree) == [2, 4]

    def test_fewer_than_three_components(self):
        scree = scree_from_log([0, -1])
        assert scree_candidates(scree) == []

    def test_smoothing_flag_runs(self):
        scree = scree_from_log([0, -1, -2, -3, -3, -3, -4, -5])
        assert isinstance(scree_candidates(scree, smooth=True), list)


class TestAutoK:
    def test_single(self):
        s = scree_from_log([0, -1, -2])
        s.candidates = [4]
        assert auto_k(s) == 4
        assert not s.no_candidates_warning

    def test_smallest(self):
        s = scree_from_log([0, -1, -2])
        s.candidates = [2, 4]
        assert auto_k(s) == 2

    def test_empty_falls_back_with_warning(self):
        s = scree_from_log([0, -1, -2])
        s.candidates = []
        assert auto_k(s) == 1
        assert s.no_candidates_warning


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_property_ratio_sum_and_order(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((rng.integers(3, 12), rng.integers(3, 12)))
    try:
        scree = fit_pca(X, n_keep=12)
    except InsufficientDataError:
        return
    r = scree.variance_ratio
    assert np.all(r > 0)
    assert np.all(np.diff(r) <= 1e-12)
    assert r.sum() <= 1.0 + 1e-9
