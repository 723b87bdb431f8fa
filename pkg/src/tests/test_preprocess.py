import numpy as np
import pytest

from conftest import random_dataset
from mvtpmsvm.data.dataset import TwoViewDataset
from mvtpmsvm.exceptions import InvalidArgumentError
from mvtpmsvm.preprocess.pipeline import ViewPreprocessor
from mvtpmsvm.preprocess.transforms import PcaBasis, Scaler, fit_pca, fit_scaler, project


def test_minmax_scaler_maps_training_data_into_unit_range():
    X = np.random.default_rng(0).normal(size=(20, 3)) * [1.0, 10.0, 0.1]
    scaled = fit_scaler(X, "minmax01").transform(X)
    assert scaled.min() >= 0.0
    assert scaled.max() <= 1.0
    np.testing.assert_allclose(scaled.min(axis=0), 0.0)
    np.testing.assert_allclose(scaled.max(axis=0), 1.0)


def test_scaler_constant_feature_maps_to_zero():
    X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    for mode in ("minmax01", "zscore"):
        np.testing.assert_array_equal(fit_scaler(X, mode).transform(X)[:, 1], 0.0)


def test_zscore_scaler_standardizes():
    X = np.random.default_rng(1).normal(loc=4.0, scale=2.0, size=(50, 2))
    scaled = fit_scaler(X, "zscore").transform(X)
    np.testing.assert_allclose(scaled.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(scaled.std(axis=0), 1.0)


def test_scaler_none_is_identity_copy():
    X = np.arange(6.0).reshape(3, 2)
    scaled = fit_scaler(X, "none").transform(X)
    np.testing.assert_array_equal(scaled, X)
    assert scaled is not X


def test_scaler_is_affine_per_feature():
    rng = np.random.default_rng(2)
    scaler = fit_scaler(rng.normal(size=(10, 3)))
    x, y = rng.normal(size=(2, 3))
    mid = scaler.transform(0.5 * (x + y))
    np.testing.assert_allclose(mid, 0.5 * (scaler.transform(x) + scaler.transform(y)))


def test_scaler_rejects_unknown_mode_and_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        fit_scaler(np.ones((3, 2)), "robust")
    with pytest.raises(InvalidArgumentError):
        fit_scaler(np.ones((3, 2))).transform(np.ones((1, 3)))


def test_scaler_dict_roundtrip():
    scaler = fit_scaler(np.random.default_rng(3).normal(size=(5, 2)), "zscore")
    restored = Scaler.from_dict(scaler.to_dict())
    assert restored.mode == "zscore"
    np.testing.assert_array_equal(restored.offset, scaler.offset)
    np.testing.assert_array_equal(restored.scale, scaler.scale)


def test_fit_pca_single_varying_coordinate():
    X = np.column_stack([np.arange(10.0), np.full(10, 3.0)])
    basis = fit_pca(X, 0.95)
    assert basis.n_components == 1
    np.testing.assert_allclose(basis.components[0], [1.0, 0.0], atol=1e-12)


def test_fit_pca_rejects_bad_input():
    with pytest.raises(InvalidArgumentError):
        fit_pca(np.ones((1, 3)))
    with pytest.raises(InvalidArgumentError):
        fit_pca(np.random.default_rng(0).normal(size=(5, 2)), threshold=0.0)
    with pytest.raises(InvalidArgumentError):
        fit_pca(np.random.default_rng(0).normal(size=(5, 2)), threshold=1.5)
    with pytest.raises(InvalidArgumentError):
        fit_pca(np.ones((5, 2)))


def test_fit_pca_components_are_orthonormal():
    X = np.random.default_rng(4).normal(size=(30, 5)) @ np.random.default_rng(5).normal(size=(5, 5))
    basis = fit_pca(X, 0.9)
    gram = basis.components @ basis.components.T
    np.testing.assert_allclose(gram, np.eye(basis.n_components), atol=1e-8)


def test_fit_pca_retains_minimal_count():
    X = np.random.default_rng(6).normal(size=(40, 6)) * [5.0, 3.0, 2.0, 1.0, 0.5, 0.1]
    threshold = 0.8
    basis = fit_pca(X, threshold)
    eigenvalues = np.sort(np.linalg.eigvalsh(np.cov(X, rowvar=False)))[::-1]
    cumulative = np.cumsum(eigenvalues) / eigenvalues.sum()
    assert cumulative[basis.n_components - 1] >= threshold - 1e-12
    if basis.n_components > 1:
        assert cumulative[basis.n_components - 2] < threshold


def test_fit_pca_ratios_match_eigensolver():
    X = np.random.default_rng(7).normal(size=(10, 4))
    basis = fit_pca(X, 1.0)
    eigenvalues = np.sort(np.linalg.eigvalsh(np.cov(X, rowvar=False)))[::-1]
    np.testing.assert_allclose(basis.explained_variance_ratio, eigenvalues / eigenvalues.sum(), atol=1e-8)


def test_fit_pca_sign_convention_and_determinism():
    X = np.random.default_rng(8).normal(size=(15, 3))
    first, second = fit_pca(X, 1.0), fit_pca(X.copy(), 1.0)
    np.testing.assert_array_equal(first.components, second.components)
    np.testing.assert_array_equal(first.explained_variance, second.explained_variance)
    for row in first.components:
        assert row[np.argmax(np.abs(row))] > 0.0


def test_full_pca_reconstructs_and_preserves_distances():
    X = np.random.default_rng(9).normal(size=(12, 4))
    basis = fit_pca(X, 1.0)
    Z = project(basis, X)
    assert basis.n_components == 4
    np.testing.assert_allclose(basis.inverse_project(Z), X, atol=1e-8)
    original = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    projected = np.linalg.norm(Z[:, None, :] - Z[None, :, :], axis=2)
    np.testing.assert_allclose(projected, original, atol=1e-8)


def test_project_mean_rows_to_zero():
    X = np.random.default_rng(10).normal(size=(8, 3))
    basis = fit_pca(X, 0.9)
    np.testing.assert_allclose(project(basis, np.tile(basis.mean, (4, 1))), 0.0, atol=1e-12)


def test_project_components_give_identity_pattern():
    X = np.random.default_rng(11).normal(size=(8, 3))
    basis = fit_pca(X, 1.0)
    np.testing.assert_allclose(project(basis, basis.components + basis.mean), np.eye(3), atol=1e-8)


def test_projection_variances_equal_eigenvalues():
    X = np.random.default_rng(12).normal(size=(25, 4)) * [3.0, 2.0, 1.0, 0.5]
    basis = fit_pca(X, 0.95)
    variances = project(basis, X).var(axis=0, ddof=1)
    np.testing.assert_allclose(variances, basis.explained_variance, atol=1e-8)


def test_project_dimension_mismatch():
    basis = fit_pca(np.random.default_rng(13).normal(size=(6, 3)))
    with pytest.raises(InvalidArgumentError):
        project(basis, np.ones((2, 4)))


def test_pca_basis_dict_roundtrip():
    basis = fit_pca(np.random.default_rng(14).normal(size=(9, 3)), 0.8)
    restored = PcaBasis.from_dict(basis.to_dict())
    np.testing.assert_array_equal(restored.components, basis.components)
    np.testing.assert_array_equal(restored.mean, basis.mean)
    assert restored.threshold == 0.8


def synthesized_dataset(seed: int) -> TwoViewDataset:
    dataset = random_dataset(seed, m1=10, m2=10, d_a=4)
    return TwoViewDataset(view_a=dataset.view_a, view_b=dataset.view_a[:, :2], labels=dataset.labels,
                          view_b_synthesized=True, pca_threshold=0.9)


def test_view_preprocessor_fits_on_training_rows_only():
    dataset = synthesized_dataset(15)
    train_rows = dataset.subset(np.arange(0, 20, 2))
    preprocessor = ViewPreprocessor.fit(train_rows)
    expected = fit_pca(fit_scaler(train_rows.view_a).transform(train_rows.view_a), 0.9)
    np.testing.assert_array_equal(preprocessor.pca.components, expected.components)
    np.testing.assert_array_equal(preprocessor.scaler_a.offset, train_rows.view_a.min(axis=0))


def test_view_preprocessor_synthesizes_view_b_from_basis():
    dataset = synthesized_dataset(16)
    preprocessor = ViewPreprocessor.fit(dataset)
    view_a, view_b = preprocessor.transform_views(dataset.view_a)
    assert view_b.shape == (20, preprocessor.pca.n_components)
    assert view_b.min() >= 0.0 and view_b.max() <= 1.0
    _, ignored_b = preprocessor.transform_views(dataset.view_a, np.zeros((20, 7)))
    np.testing.assert_array_equal(ignored_b, view_b)
    np.testing.assert_array_equal(view_a, fit_scaler(dataset.view_a).transform(dataset.view_a))


def test_view_preprocessor_scales_the_projection_per_view():
    dataset = synthesized_dataset(20)
    preprocessor = ViewPreprocessor.fit(dataset, "zscore")
    scaled_a = preprocessor.scaler_a.transform(dataset.view_a)
    projection = project(preprocessor.pca, scaled_a)
    np.testing.assert_array_equal(preprocessor.scaler_b.offset, fit_scaler(projection, "zscore").offset)
    _, view_b = preprocessor.transform_views(dataset.view_a)
    np.testing.assert_array_equal(view_b, preprocessor.scaler_b.transform(projection))


def test_view_preprocessor_requires_view_b_without_basis():
    preprocessor = ViewPreprocessor.fit(random_dataset(17))
    assert preprocessor.pca is None
    with pytest.raises(InvalidArgumentError):
        preprocessor.transform_views(np.ones((2, 3)))


def test_view_preprocessor_dict_roundtrip():
    preprocessor = ViewPreprocessor.fit(synthesized_dataset(18), "zscore")
    restored = ViewPreprocessor.from_dict(preprocessor.to_dict())
    view_a = np.random.default_rng(19).normal(size=(5, 4))
    for got, want in zip(restored.transform_views(view_a), preprocessor.transform_views(view_a)):
        np.testing.assert_array_equal(got, want)
