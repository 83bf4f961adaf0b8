import numpy as np
import pytest

from oracles import eig_pca
from snakeid.errors import DimensionError, InsufficientData, ShapeError
from snakeid.manifest import ManifestRow
from snakeid.projection import export_scatter, fit_pca, project

rng = np.random.default_rng(31)


def test_rank1_line_recovers_direction():
    t = np.arange(1, 11, dtype=float)
    X = np.stack([t, 2 * t], axis=1)
    model = fit_pca(X, k=2)
    expected = np.array([1.0, 2.0]) / np.sqrt(5)
    assert np.max(np.abs(model.components[0] - expected)) <= 1e-9
    ratio = model.explained_variance[0] / model.explained_variance.sum()
    assert ratio == pytest.approx(1.0, abs=1e-9)


def test_components_orthonormal_and_sign_normalized():
    X = rng.standard_normal((40, 6))
    model = fit_pca(X, k=2)
    c = model.components
    assert abs(c[0] @ c[1]) <= 1e-6
    assert np.linalg.norm(c[0]) == pytest.approx(1.0, abs=1e-6)
    assert np.linalg.norm(c[1]) == pytest.approx(1.0, abs=1e-6)
    for comp in c:
        first_nonzero = comp[np.abs(comp) > 1e-12][0]
        assert first_nonzero > 0
    # refitting is deterministic
    model2 = fit_pca(X, k=2)
    assert np.array_equal(model.components, model2.components)


def test_explained_variance_non_increasing():
    X = rng.standard_normal((60, 5)) * np.array([3.0, 2.0, 1.0, 0.5, 0.1])
    model = fit_pca(X, k=2)
    assert model.explained_variance[0] >= model.explained_variance[1] >= 0


def test_matches_dense_eigendecomposition():
    X = rng.standard_normal((50, 8))
    model = fit_pca(X, k=2)
    _, eig_components, eig_vars = eig_pca(X, 2)
    for mine, theirs, lam in zip(model.components, eig_components, eig_vars):
        sign = 1.0 if abs(mine @ theirs) == 0 else np.sign(mine @ theirs)
        assert np.max(np.abs(mine - sign * theirs)) <= 1e-6
    assert np.max(np.abs(model.explained_variance - eig_vars)) <= 1e-6


def test_isotropic_variances_close():
    X = np.random.default_rng(0).standard_normal((10000, 3))
    model = fit_pca(X, k=2)
    v = model.explained_variance
    assert v[0] / v[1] <= 1.10  # within 10 percent of each other


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        fit_pca(np.ones((1, 3)))
    with pytest.raises(DimensionError):
        fit_pca(np.ones((5, 1)), k=2)


def test_project_mean_is_origin():
    X = rng.standard_normal((20, 4))
    model = fit_pca(X)
    assert np.max(np.abs(project(model, X.mean(axis=0)))) <= 1e-9


def test_project_rank1_second_coordinate_zero():
    t = np.linspace(-3, 3, 15)
    X = np.stack([t, -t, 2 * t], axis=1)
    model = fit_pca(X)
    coords = project(model, X)
    assert np.max(np.abs(coords[:, 1])) <= 1e-6


def test_project_matches_oracle():
    X = rng.standard_normal((30, 5))
    model = fit_pca(X)
    expected = (X - model.mean) @ model.components.T
    assert np.max(np.abs(project(model, X) - expected)) <= 1e-12


def test_projected_centered_data_zero_mean():
    X = rng.standard_normal((25, 6))
    model = fit_pca(X)
    coords = project(model, X)
    assert np.max(np.abs(coords.mean(axis=0))) <= 1e-9


def test_project_dimension_mismatch():
    model = fit_pca(rng.standard_normal((10, 4)))
    with pytest.raises(DimensionError):
        project(model, np.ones((3, 5)))


def test_export_scatter():
    rows = [
        ManifestRow(1, 10, "a.jpg", 12, False, "train"),
        ManifestRow(1, 11, "b.jpg", 12, False, "train"),
        ManifestRow(2, 12, "c.jpg", 20, True, "test"),
    ]
    coords = np.array([[0.5, -1.0], [1.25, 0.0], [-2.0, 3.5]])
    text = export_scatter(coords, rows)
    lines = text.splitlines()
    assert lines[0] == "image_id,x,y,class_id,venomous"
    assert len(lines) == 4
    assert all(len(line.split(",")) == 5 for line in lines)
    assert lines[1] == "10,0.5,-1.0,12,0"
    assert lines[3] == "12,-2.0,3.5,20,1"


def test_export_scatter_empty():
    assert export_scatter(np.zeros((0, 2)), []) == "image_id,x,y,class_id,venomous\n"


def test_export_scatter_length_mismatch():
    with pytest.raises(ShapeError):
        export_scatter(np.zeros((2, 2)), [ManifestRow(1, 10, "a.jpg", 12, False, "train")])
