"""Kernel machines, random feature models, and the width sweep."""

import math

import numpy as np
import pytest

from interplab import datagen, kernelmach as km, numlin
from interplab.errors import (
    DimensionMismatch,
    IllConditioned,
    InvalidSpec,
)
from interplab.rng import substream


def _two_point_laplace():
    # distance ln 2 apart so the off-diagonal kernel value is exactly 1/2
    X = np.array([[0.0], [math.log(2.0)]])
    y = np.array([1.0, 1.0])
    return datagen.make_dataset(X, y, task=datagen.REGRESSION)


# --- kernel evaluation ---

def test_laplace_value_at_log_two():
    spec = km.KernelSpec("laplace", 1.0)
    v = km.kernel_eval(spec, [0.0], [math.log(2.0)])
    assert abs(v - 0.5) < 1e-15


def test_gaussian_value_at_sqrt_two():
    spec = km.KernelSpec("gaussian", 1.0)
    v = km.kernel_eval(spec, [0.0, 0.0], [1.0, 1.0])
    assert abs(v - math.exp(-1.0)) < 1e-15


def test_kernel_matrix_matches_pointwise_eval():
    rng = substream(9, "km-pointwise")
    X = rng.standard_normal((7, 3))
    Z = rng.standard_normal((4, 3))
    for family, b in (("gaussian", 0.7), ("laplace", 1.3)):
        spec = km.KernelSpec(family, b)
        K = km.kernel_matrix(spec, X, Z)
        assert K.shape == (7, 4)
        for i in range(7):
            for j in range(4):
                assert abs(K[i, j] - km.kernel_eval(spec, X[i], Z[j])) < 1e-12


def test_kernel_matrix_symmetric_unit_diagonal_psd():
    rng = substream(10, "km-psd")
    X = rng.standard_normal((30, 4))
    for family in ("gaussian", "laplace"):
        K = km.kernel_matrix(km.KernelSpec(family, 0.9), X)
        assert np.allclose(K, K.T, atol=1e-14)
        assert np.allclose(np.diag(K), 1.0, atol=1e-14)
        w = np.linalg.eigvalsh(K)
        assert w.min() > -1e-10


def test_kernel_values_shrink_with_distance():
    spec = km.KernelSpec("laplace", 2.0)
    d = np.linspace(0.1, 5.0, 20)
    vals = [km.kernel_eval(spec, [0.0], [t]) for t in d]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert all(0.0 < v < 1.0 for v in vals)


def test_bad_kernel_family_rejected():
    with pytest.raises(InvalidSpec):
        km.kernel_matrix(km.KernelSpec("cubic", 1.0), np.zeros((2, 1)))
    with pytest.raises(InvalidSpec):
        km.kernel_matrix(km.KernelSpec("gaussian", 0.0), np.zeros((2, 1)))


# --- interpolating fits ---

def test_two_point_fit_worked_example():
    # K = [[1, 1/2], [1/2, 1]], y = (1, 1) -> alpha = (2/3, 2/3), norm^2 = 4/3
    mach = km.fit_interpolating(km.KernelSpec("laplace", 1.0), _two_point_laplace())
    assert np.allclose(mach.alpha, [2.0 / 3.0, 2.0 / 3.0], atol=1e-12)
    assert abs(km.rkhs_norm_sq(mach) - 4.0 / 3.0) < 1e-12
    assert mach.fit_jitter == 0.0


def test_fit_interpolates_training_data():
    rng = substream(11, "km-fit")
    X = rng.standard_normal((40, 3))
    y = rng.standard_normal(40)
    ds = datagen.make_dataset(X, y, task=datagen.REGRESSION)
    for family in ("laplace", "gaussian"):
        mach = km.fit_interpolating(km.KernelSpec(family, 1.0), ds)
        bound = 1e-6 * (1.0 + np.abs(y).max())
        assert mach.fit_residual <= bound
        pred = km.kernel_predict(mach, X)
        assert np.abs(pred - y).max() <= bound


def test_norm_quadratic_under_label_scaling():
    ds = _two_point_laplace()
    spec = km.KernelSpec("laplace", 1.0)
    base = km.rkhs_norm_sq(km.fit_interpolating(spec, ds))
    doubled = datagen.make_dataset(ds.X, 2.0 * ds.y, task=datagen.REGRESSION)
    assert abs(km.rkhs_norm_sq(km.fit_interpolating(spec, doubled)) - 4.0 * base) < 1e-9


def test_jitter_ladder_engages_on_flat_kernel():
    # gaussian with a wide bandwidth on a tight grid is not PD at jitter zero
    X = np.linspace(0.0, 1.0, 20)[:, None]
    y = np.sin(3.0 * X[:, 0])
    ds = datagen.make_dataset(X, y, task=datagen.REGRESSION)
    mach = km.fit_interpolating(km.KernelSpec("gaussian", 0.5), ds)
    assert mach.fit_jitter > 0.0
    assert mach.fit_residual <= 1e-6 * (1.0 + np.abs(y).max())


def test_hopeless_conditioning_raises_instead_of_fitting_badly():
    X = np.linspace(0.0, 1.0, 20)[:, None]
    y = np.sin(3.0 * X[:, 0])
    ds = datagen.make_dataset(X, y, task=datagen.REGRESSION)
    with pytest.raises(IllConditioned):
        km.fit_interpolating(km.KernelSpec("gaussian", 2.0), ds)


def test_prediction_far_from_data_decays():
    ds = _two_point_laplace()
    mach = km.fit_interpolating(km.KernelSpec("laplace", 1.0), ds)
    far = km.kernel_predict(mach, np.array([[50.0]]))
    assert abs(far[0]) < 1e-15


# --- random feature models ---

def test_one_point_one_feature_weight():
    # m = n = 1: the unique min-norm solution is w = y * exp(-i <v, x>)
    x = np.array([[0.3, -0.7]])
    y = np.array([1.5])
    freqs = km.draw_rff_freqs(1, 2, seed=4)
    model = km.rff_fit_minnorm(x, y, freqs)
    expected = y[0] * np.exp(-1j * float(freqs[0] @ x[0]))
    assert abs(model.weights[0] - expected) < 1e-12
    assert abs(km.rff_predict(model, x)[0] - y[0]) < 1e-12


def test_rff_features_unit_modulus():
    rng = substream(12, "rff-mod")
    X = rng.standard_normal((6, 3))
    phi = km.rff_features(km.draw_rff_freqs(9, 3, seed=1), X)
    assert phi.shape == (6, 9)
    assert np.allclose(np.abs(phi), 1.0, atol=1e-14)


def test_rff_freq_prefix_property():
    # width sweeps reuse one stack: shorter draws are prefixes of longer ones
    a = km.draw_rff_freqs(3, 4, seed=7, replicate=2)
    b = km.draw_rff_freqs(10, 4, seed=7, replicate=2)
    assert np.array_equal(a, b[:3])
    c = km.draw_rff_freqs(10, 4, seed=7, replicate=3)
    assert not np.array_equal(b, c)


def test_overparametrized_fit_interpolates():
    rng = substream(13, "rff-interp")
    X = rng.standard_normal((15, 2))
    y = rng.standard_normal(15)
    model = km.rff_fit_minnorm(X, y, km.draw_rff_freqs(60, 2, seed=3))
    assert km.rff_train_mse(model, X, y) < 1e-18
    assert np.abs(km.rff_predict(model, X) - y).max() < 1e-9


def test_underparametrized_fit_is_least_squares():
    rng = substream(14, "rff-ls")
    X = rng.standard_normal((20, 2))
    y = rng.standard_normal(20)
    freqs = km.draw_rff_freqs(6, 2, seed=5)
    model = km.rff_fit_minnorm(X, y, freqs)
    phi = km.rff_features(freqs, X)
    resid = phi @ model.weights - y
    # normal equations: residual orthogonal to every feature column
    assert np.abs(phi.conj().T @ resid).max() < 1e-10


def test_minnorm_matches_complex_lstsq_oracle():
    rng = substream(15, "rff-oracle")
    X = rng.standard_normal((10, 3))
    y = rng.standard_normal(10)
    for m in (4, 10, 37):
        freqs = km.draw_rff_freqs(m, 3, seed=6)
        model = km.rff_fit_minnorm(X, y, freqs)
        phi = km.rff_features(freqs, X)
        w_ref = np.linalg.lstsq(phi, y.astype(complex), rcond=None)[0]
        assert np.abs(model.weights - w_ref).max() < 1e-8


def test_rff_shape_mismatch_rejected():
    freqs = km.draw_rff_freqs(4, 2, seed=1)
    with pytest.raises(DimensionMismatch):
        km.rff_features(freqs, np.zeros((3, 5)))
    with pytest.raises(DimensionMismatch):
        km.rff_fit_minnorm(np.zeros((3, 2)), np.zeros(4), freqs)


def test_scaled_weight_norm_approaches_kernel_norm_from_above():
    # on smooth labels m * ||w||^2 decreases toward the kernel machine's
    # alpha^T K alpha as the feature count grows
    rng = substream(314, "norm-trend")
    X = rng.uniform(-1.5, 1.5, size=(24, 2))
    y = np.sign(X[:, 0])
    ds = datagen.make_dataset(X, y, task=datagen.CLASSIFICATION)
    mach = km.fit_interpolating(km.KernelSpec("gaussian", 1.0), ds)
    limit = km.rkhs_norm_sq(mach)
    means = []
    for m in (240, 960, 3840):
        ratios = []
        for rep in range(4):
            freqs = km.draw_rff_freqs(m, 2, seed=777, replicate=rep)
            model = km.rff_fit_minnorm(ds.X, ds.y, freqs)
            ratios.append(m * float(np.sum(np.abs(model.weights) ** 2)) / limit)
        means.append(float(np.mean(ratios)))
    assert means[0] > means[1] > means[2]
    assert means[2] > 1.0
    assert means[2] < 2.5


# --- width sweep ---

def _sweep_fixture():
    train = datagen.sample(datagen.TwoGaussians(3.0, 1.0, dim=10, seed=21), 60)
    test = datagen.sample(datagen.TwoGaussians(3.0, 1.0, dim=10, seed=22), 500)
    grid = [6, 12, 24, 48, 60, 72, 120, 300, 600]
    return train, test, grid


def test_sweep_shapes_and_row_layout():
    train, test, grid = _sweep_fixture()
    res = km.double_descent_sweep(train, test, grid, 3, seed=5)
    assert list(res.m_grid) == grid
    assert len(res.rows) == len(grid) * 3
    for row in res.rows:
        assert len(row) == 7
        m, rep, tr, te, zo, nrm, thr = row
        assert m in grid and 0 <= rep < 3
        assert tr >= 0.0 and te >= 0.0 and 0.0 <= zo <= 1.0 and nrm >= 0.0
        assert thr == res.thresholds[rep]


def test_sweep_train_mse_monotone_per_replicate():
    train, test, grid = _sweep_fixture()
    res = km.double_descent_sweep(train, test, grid, 3, seed=5)
    for rep in range(3):
        tr = [row[2] for row in res.rows if row[1] == rep]
        for a, b in zip(tr, tr[1:]):
            assert b <= a + 1e-12


def test_sweep_threshold_at_sample_size():
    # nested draws keep the achieved-interpolation width stable over replicates
    train, test, grid = _sweep_fixture()
    res = km.double_descent_sweep(train, test, grid, 3, seed=5)
    assert list(res.thresholds) == [60, 60, 60]


def test_sweep_norm_peaks_at_threshold_then_decays():
    train, test, grid = _sweep_fixture()
    res = km.double_descent_sweep(train, test, grid, 3, seed=5)
    peak = int(np.argmax(res.norm_mean))
    thr_idx = grid.index(int(res.thresholds[0]))
    assert abs(peak - thr_idx) <= 1
    after = res.norm_mean[peak:]
    se = res.norm_se[peak:]
    for i in range(len(after) - 1):
        assert after[i + 1] <= after[i] + se[i] + se[i + 1]


def test_sweep_second_descent():
    train, test, grid = _sweep_fixture()
    res = km.double_descent_sweep(train, test, grid, 3, seed=5)
    thr_idx = grid.index(int(res.thresholds[0]))
    assert res.test_01_mean[thr_idx] > res.test_01_mean[-1]
    assert res.test_mse_mean[thr_idx] > res.test_mse_mean[-1]


def test_sweep_reproducible_and_seed_sensitive():
    train, test, grid = _sweep_fixture()
    a = km.double_descent_sweep(train, test, grid[:5], 2, seed=5)
    b = km.double_descent_sweep(train, test, grid[:5], 2, seed=5)
    assert a.rows == b.rows
    c = km.double_descent_sweep(train, test, grid[:5], 2, seed=6)
    assert a.rows != c.rows


def test_sweep_input_validation():
    train, test, grid = _sweep_fixture()
    with pytest.raises(InvalidSpec):
        km.double_descent_sweep(train, test, [], 2, seed=1)
    with pytest.raises(InvalidSpec):
        km.double_descent_sweep(train, test, [0, 5], 2, seed=1)
    with pytest.raises(InvalidSpec):
        km.double_descent_sweep(train, test, grid, 0, seed=1)
    line = datagen.sample(datagen.NoisyLine(1.0, 0.1, seed=2), 30)
    with pytest.raises(InvalidSpec):
        km.double_descent_sweep(line, test, grid, 2, seed=1)
