import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fftmap.errors import GeometryError, ParameterError
from fftmap.image_io import GrayImage
from fftmap.window_fft import (build_dataset, hann2d, plan_grid,
                               power_spectrum)


class TestPlanGrid:
    def test_default_geometry(self):
        g = plan_grid(2048, 2048, 128, 64, 64)
        assert g.nx == g.ny == 31
        assert g.xs[-1] == 1920

    def test_exact_tiling(self):
        g = plan_grid(256, 256, 128, 128, 128)
        assert g.xs.tolist() == [0, 128]
        assert g.ys.tolist() == [0, 128]

    def test_coverage_append(self):
        g = plan_grid(300, 300, 128, 64, 64)
        assert g.xs.tolist() == [0, 64, 128, 172]

    def test_elemsize_exceeds_dimension(self):
        with pytest.raises(GeometryError, match="width"):
            plan_grid(100, 300, 128, 64, 64)
        with pytest.raises(GeometryError, match="height"):
            plan_grid(300, 100, 128, 64, 64)

    def test_halving_steps_quadruples_windows(self):
        # exact counts: 31 origins per axis at step 64, 61 at step 32
        g1 = plan_grid(2048, 2048, 128, 64, 64)
        g2 = plan_grid(2048, 2048, 128, 32, 32)
        assert g1.n_windows == 31 * 31
        assert g2.n_windows == 61 * 61
        assert g2.nx == 2 * g1.nx - 1  # within +-1 per axis of doubling

    @given(
        width=st.integers(16, 600),
        height=st.integers(16, 600),
        elemsize=st.integers(8, 64),
        xstep=st.integers(1, 80),
        ystep=st.integers(1, 80),
    )
    @settings(max_examples=60, deadline=None)
    def test_coverage_and_invariants(self, width, height, elemsize, xstep, ystep):
        if elemsize > min(width, height):
            return
        g = plan_grid(width, height, elemsize, xstep, ystep)
        assert g.xs[0] == 0 and g.ys[0] == 0
        assert g.xs[-1] + elemsize == width
        assert g.ys[-1] + elemsize == height
        assert np.all(np.diff(g.xs) > 0) and np.all(np.diff(g.xs) <= xstep)
        assert np.all(np.diff(g.ys) > 0) and np.all(np.diff(g.ys) <= ystep)
        # union of windows marks every pixel (full coverage needs
        # steps <= elemsize; larger steps leave inter-window gaps)
        if xstep <= elemsize and ystep <= elemsize:
            row = np.zeros(width, dtype=bool)
            col = np.zeros(height, dtype=bool)
            for x in g.xs:
                row[x:x + elemsize] = True
            for y in g.ys:
                col[y:y + elemsize] = True
            assert row.all() and col.all()


class TestHann2d:
    def test_n4(self):
        w2 = hann2d(4)
        assert w2[1, 1] == pytest.approx(0.75 ** 2)
        assert w2[0, 0] == 0.0 and w2[3, 3] == 0.0

    def test_n3_center(self):
        w2 = hann2d(3)
        assert w2[1, 1] == pytest.approx(1.0)
        assert w2[0, 1] == 0.0

    @pytest.mark.parametrize("n", [2, 5, 16, 33])
    def test_borders_zero(self, n):
        w2 = hann2d(n)
        assert np.all(w2[0] == 0) and np.all(w2[-1] == 0)
        assert np.all(w2[:, 0] == 0) and np.all(w2[:, -1] == 0)

    def test_too_small(self):
        with pytest.raises(ParameterError):
            hann2d(1)

    def test_matches_formula_oracle(self):
        assert np.allclose(hann2d(17), oracles.hann_window(17), atol=1e-15)


class TestPowerSpectrum:
    def test_constant_roi_dc_only(self):
        n = 32
        window = hann2d(n)
        spec = power_spectrum(np.full((n, n), 7.0), window)
        c = n // 2
        assert spec[c, c] == pytest.approx((7.0 * window.sum()) ** 2, rel=1e-12)
        assert spec[c, c] == spec.max()

    def test_pure_tone_peaks(self):
        n = 128
        x = np.arange(n)
        roi = np.tile(np.cos(2 * np.pi * x / 8.0), (n, 1))
        spec = power_spectrum(roi, hann2d(n))
        c = n // 2
        masked = spec.copy()
        masked[c - 3:c + 4, c - 3:c + 4] = 0  # drop DC leakage
        iy, ix = np.unravel_index(np.argmax(masked), spec.shape)
        assert iy == c
        assert abs(ix - c) == 16  # 128/8

    def test_parseval(self):
        rng = np.random.default_rng(5)
        n = 24
        roi = rng.random((n, n)) * 50
        window = hann2d(n)
        spec = power_spectrum(roi, window)
        tapered = roi * window
        assert spec.sum() == pytest.approx(n * n * np.sum(tapered ** 2), rel=1e-9)

    def test_point_symmetry(self):
        rng = np.random.default_rng(6)
        n = 16
        spec = power_spectrum(rng.random((n, n)), hann2d(n))
        c = n // 2
        for u in range(1, c):
            for v in range(-c + 1, c):
                assert spec[c + u, c + v] == pytest.approx(spec[c - u, c - v], rel=1e-9)

    def test_against_dft_matrix_oracle(self):
        rng = np.random.default_rng(7)
        n = 12
        roi = rng.random((n, n)) * 10
        window = hann2d(n)
        expected = oracles.dft_power_spectrum(roi, window)
        got = power_spectrum(roi, window)
        assert np.allclose(got, expected, rtol=1e-8, atol=1e-6)


class TestBuildDataset:
    def test_shape_2x2(self):
        img = GrayImage(np.random.default_rng(8).random((256, 256)))
        grid = plan_grid(256, 256, 128, 128, 128)
        st_ = build_dataset(img, grid)
        assert st_.X.shape == (4, 16384)
        assert st_.X.min() >= 0

    def test_constant_image_identical_rows(self):
        img = GrayImage(np.full((64, 64), 3.0))
        grid = plan_grid(64, 64, 16, 16, 16)
        X = build_dataset(img, grid).X
        assert np.allclose(X, X[0], rtol=1e-12, atol=1e-9)

    def test_intensity_scaling_quadratic(self):
        data = np.random.default_rng(9).random((64, 64))
        grid = plan_grid(64, 64, 16, 16, 16)
        X1 = build_dataset(GrayImage(data), grid).X
        X3 = build_dataset(GrayImage(3.0 * data), grid).X
        assert np.allclose(X3, 9.0 * X1, rtol=1e-12)

    def test_row_order_matches_grid(self):
        # one bright window: its row index must be gy*nx + gx
        data = np.zeros((64, 64))
        data[16:32, 32:48] = 100.0  # gy=1, gx=2 at step 16
        grid = plan_grid(64, 64, 16, 16, 16)
        X = build_dataset(GrayImage(data), grid).X
        energies = X.sum(axis=1)
        assert np.argmax(energies) == 1 * grid.nx + 2

    def test_determinism_bit_identical(self):
        data = np.random.default_rng(10).random((200, 150)) * 100
        img = GrayImage(data)
        grid = plan_grid(150, 200, 32, 24, 24)
        X1 = build_dataset(img, grid).X
        X2 = build_dataset(img, grid).X
        assert np.array_equal(X1, X2)

    def test_chunk_boundaries_do_not_matter(self, monkeypatch):
        import fftmap.window_fft as wf
        data = np.random.default_rng(11).random((96, 96))
        img = GrayImage(data)
        grid = plan_grid(96, 96, 16, 8, 8)
        X1 = build_dataset(img, grid).X
        monkeypatch.setattr(wf, "_FFT_CHUNK", 7)
        X2 = build_dataset(img, grid).X
        assert np.array_equal(X1, X2)
