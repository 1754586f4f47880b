import numpy as np
import pytest

from interplab import datagen, direct
from interplab.datagen import NoisyLine, TwoGaussians
from interplab.errors import (
    DegeneratePosition,
    DimensionMismatch,
    DimensionTooHigh,
    InvalidSpec,
    OutsideHull,
    OutsideSimplex,
)


def _toy(X, y, task=datagen.REGRESSION):
    return datagen.make_dataset(np.asarray(X, dtype=float), np.asarray(y, dtype=float), task)


# --- nearest neighbor rules ---

def test_one_nn_interpolates_training_points():
    ds = datagen.sample(TwoGaussians(seed=0), 80)
    p = direct.make_neighbor_predictor(ds, k=1)
    got = direct.knn_predict_batch(p, ds.X)
    assert np.array_equal(got, ds.y)


def test_one_nn_tie_breaks_to_lowest_index():
    ds = _toy([[0.0], [2.0]], [-1.0, 1.0], datagen.CLASSIFICATION)
    p = direct.make_neighbor_predictor(ds, k=1)
    assert direct.knn_predict(p, np.array([1.0])) == -1.0


def test_singular_equidistant_pair_averages():
    # Two neighbors at equal distance with labels 0 and 2 mix to 1.
    ds = _toy([[-1.0], [1.0]], [0.0, 2.0])
    p = direct.make_neighbor_predictor(ds, k=2, weighting=direct.SINGULAR)
    assert direct.knn_predict(p, np.array([0.0])) == pytest.approx(1.0)


def test_singular_interpolates_for_any_k():
    ds = datagen.sample(TwoGaussians(seed=3, dim=2), 60)
    p = direct.make_neighbor_predictor(ds, k=7, weighting=direct.SINGULAR)
    got = direct.knn_predict_batch(p, ds.X)
    assert np.array_equal(got, ds.y)


def test_singular_near_coincidence_returns_label():
    ds = datagen.sample(NoisyLine(seed=4), 50)
    p = direct.make_neighbor_predictor(ds, k=5, weighting=direct.SINGULAR)
    x = ds.X[17] + 1e-13
    assert direct.knn_predict(p, x) == ds.y[17]
    x = ds.X[17] + 1e-9
    assert direct.knn_predict(p, x) == pytest.approx(ds.y[17], abs=1e-6)


def test_uniform_knn_is_neighbor_mean():
    ds = _toy([[0.0], [1.0], [10.0]], [3.0, 5.0, 100.0])
    p = direct.make_neighbor_predictor(ds, k=2)
    assert direct.knn_predict(p, np.array([0.4])) == pytest.approx(4.0)


def test_uniform_knn_classification_sign_tie_is_negative():
    ds = _toy([[0.0], [1.0]], [1.0, -1.0], datagen.CLASSIFICATION)
    p = direct.make_neighbor_predictor(ds, k=2)
    assert direct.knn_predict(p, np.array([0.3])) == -1.0


def test_singular_regression_tracks_clean_line():
    # Singular-kernel smoothing of a noisy line should beat the raw noise
    # level on a fresh grid.
    errs = []
    grid = np.linspace(0.05, 0.95, 101)[:, None]
    for seed in range(20):
        ds = datagen.sample(NoisyLine(slope=1.0, noise_sd=0.25, seed=seed), 200)
        p = direct.make_neighbor_predictor(ds, k=10, weighting=direct.SINGULAR)
        pred = direct.knn_predict_batch(p, grid)
        errs.append(float(np.mean((pred - grid[:, 0]) ** 2)))
    assert float(np.mean(errs)) < 0.0625


def test_neighbor_predictor_validation():
    ds = _toy([[0.0]], [1.0])
    with pytest.raises(InvalidSpec):
        direct.make_neighbor_predictor(ds, k=2)
    with pytest.raises(InvalidSpec):
        direct.make_neighbor_predictor(ds, weighting="gauss")
    with pytest.raises(DimensionMismatch):
        direct.knn_predict(direct.make_neighbor_predictor(ds), np.zeros(3))


# --- simplicial interpolation ---

def test_build_simplicial_dim1_segments():
    ds = _toy([[2.0], [0.0], [1.0]], [4.0, 0.0, 1.0])
    interp = direct.build_simplicial(ds)
    assert set(interp.simplices) == {(1, 2), (2, 0)}
    assert direct.simplicial_predict(interp, np.array([0.5])) == pytest.approx(0.5)
    assert direct.simplicial_predict(interp, np.array([1.5])) == pytest.approx(2.5)


def test_simplicial_interpolates_vertices():
    rng = np.random.default_rng(0)
    ds = _toy(rng.standard_normal((30, 2)), rng.standard_normal(30))
    interp = direct.build_simplicial(ds)
    for i in range(0, 30, 5):
        got = direct.simplicial_predict(interp, ds.X[i])
        assert got == pytest.approx(ds.y[i], abs=1e-9)


def _circumcircle(a, b, c):
    m = 2.0 * np.array([b - a, c - a])
    rhs = np.array([b @ b - a @ a, c @ c - a @ a])
    center = np.linalg.solve(m, rhs)
    return center, np.linalg.norm(a - center)


def test_square_triangulation_and_empty_circumcircle():
    ds = _toy([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [1.0, 1.0, 1.0, -1.0])
    interp = direct.build_simplicial(ds)
    assert len(interp.simplices) == 2
    for simp in interp.simplices:
        pts = [ds.X[i] for i in simp]
        center, radius = _circumcircle(*pts)
        for j in range(ds.n):
            if j not in simp:
                assert np.linalg.norm(ds.X[j] - center) >= radius - 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_random_triangulation_empty_circumcircle(seed):
    rng = np.random.default_rng(700 + seed)
    ds = _toy(rng.random((25, 2)), rng.standard_normal(25))
    interp = direct.build_simplicial(ds)
    for simp in interp.simplices:
        center, radius = _circumcircle(*(ds.X[i] for i in simp))
        others = np.array([ds.X[j] for j in range(ds.n) if j not in simp])
        dist = np.linalg.norm(others - center, axis=1)
        assert np.all(dist >= radius - 1e-9)


def test_triangulation_covers_hull_with_disjoint_cells():
    from scipy.spatial import ConvexHull

    rng = np.random.default_rng(77)
    ds = _toy(rng.random((40, 2)), rng.standard_normal(40))
    interp = direct.build_simplicial(ds)
    total = 0.0
    for simp in interp.simplices:
        a, b, c = (ds.X[i] for i in simp)
        u, v = b - a, c - a
        total += 0.5 * abs(u[0] * v[1] - u[1] * v[0])
    assert total == pytest.approx(ConvexHull(ds.X).volume, rel=1e-10)


def test_no_training_point_strictly_inside_any_cell():
    rng = np.random.default_rng(78)
    ds = _toy(rng.random((30, 2)), rng.standard_normal(30))
    interp = direct.build_simplicial(ds)
    for simp in interp.simplices:
        a, b, c = (ds.X[i] for i in simp)
        m = np.column_stack([b - a, c - a])
        for j in range(ds.n):
            if j in simp:
                continue
            lam = np.linalg.solve(m, ds.X[j] - a)
            inside = lam[0] > 1e-9 and lam[1] > 1e-9 and lam.sum() < 1 - 1e-9
            assert not inside


def test_dim1_classification_matches_one_nn():
    rng = np.random.default_rng(11)
    X = np.sort(rng.random(25))[:, None]
    y = np.where(rng.random(25) < 0.5, 1.0, -1.0)
    ds = _toy(X, y, datagen.CLASSIFICATION)
    interp = direct.build_simplicial(ds)
    p = direct.make_neighbor_predictor(ds, k=1)
    queries = rng.uniform(X.min(), X.max(), size=100)
    for q in queries:
        assert direct.simplicial_predict(interp, np.array([q])) == direct.knn_predict(
            p, np.array([q]))


def test_simplicial_degenerate_and_dim_errors():
    with pytest.raises(DegeneratePosition):
        direct.build_simplicial(_toy([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], [0.0, 1.0, 2.0]))
    with pytest.raises(DimensionTooHigh):
        direct.build_simplicial(_toy(np.eye(4), np.ones(4)))
    with pytest.raises(DegeneratePosition):
        direct.build_simplicial(_toy([[0.0, 0.0], [1.0, 0.0]], [0.0, 1.0]))


def test_simplicial_outside_hull():
    ds = _toy([[0.0], [1.0]], [0.0, 1.0])
    interp = direct.build_simplicial(ds)
    with pytest.raises(OutsideHull):
        direct.simplicial_predict(interp, np.array([1.5]))
    rng = np.random.default_rng(5)
    ds2 = _toy(rng.random((10, 2)), rng.standard_normal(10))
    with pytest.raises(OutsideHull):
        direct.simplicial_predict(direct.build_simplicial(ds2), np.array([5.0, 5.0]))


def test_simplicial_3d_smoke():
    rng = np.random.default_rng(21)
    X = np.vstack([np.eye(3), np.zeros((1, 3)), rng.random((10, 3)) * 0.5])
    ds = _toy(X, rng.standard_normal(14))
    interp = direct.build_simplicial(ds)
    got = direct.simplicial_predict(interp, np.full(3, 0.1))
    assert np.isfinite(got)
    for i in (0, 3, 7):
        assert direct.simplicial_predict(interp, ds.X[i]) == pytest.approx(ds.y[i], abs=1e-9)


# --- standard-simplex closed form ---

def test_simplex_example_vertices_and_origin():
    assert direct.simplex_example_predict(np.array([1.0, 0.0, 0.0])) == 1.0
    assert direct.simplex_example_predict(np.zeros(3)) == -1.0


def test_simplex_example_tie_goes_negative():
    assert direct.simplex_example_predict(np.array([0.25, 0.25])) == -1.0
    assert direct.simplex_example_predict(np.array([0.5])) == -1.0


def test_simplex_example_outside():
    with pytest.raises(OutsideSimplex):
        direct.simplex_example_predict(np.array([0.8, 0.3]))
    with pytest.raises(OutsideSimplex):
        direct.simplex_example_predict(np.array([-0.1, 0.2]))


def test_simplex_minority_volume_d3():
    frac, se = direct.simplex_minority_volume(3, 200_000, seed=0)
    assert abs(frac - 0.125) < 4 * se


def test_simplex_minority_volume_agrees_with_scalar_predictor():
    rng = np.random.default_rng(9)
    e = rng.standard_exponential((500, 4))
    pts = (e / e.sum(axis=1, keepdims=True))[:, :3]
    scalar = np.array([direct.simplex_example_predict(p) for p in pts])
    vector = np.where(2.0 * pts.sum(axis=1) - 1.0 > 0, 1.0, -1.0)
    assert np.array_equal(scalar, vector)


# --- risk sanity ---

def test_one_nn_risk_close_to_twice_bayes():
    spec = TwoGaussians(separation=2.0, scale=1.0, dim=2, seed=100)
    r_star = datagen.bayes_risk(spec, 0.0)
    risks = []
    for seed in range(5):
        train = datagen.sample(TwoGaussians(separation=2.0, dim=2, seed=200 + seed), 1000)
        test = datagen.sample(TwoGaussians(separation=2.0, dim=2, seed=900 + seed), 1000)
        p = direct.make_neighbor_predictor(train, k=1)
        pred = direct.knn_predict_batch(p, test.X)
        risks.append(float(np.mean(pred != test.y)))
    mean_risk = float(np.mean(risks))
    assert r_star - 0.02 <= mean_risk <= 2 * r_star + 0.1
