import numpy as np
import pytest

from kgranger.errors import RankDeficientWarning, ShapeError
from kgranger.kernels import KernelConfig
from kgranger.kpca import (
    choose_component_count,
    fit_kpca,
    fit_preimage,
    project,
    reconstruct,
    train_scores,
    truncate,
)

LINEAR = KernelConfig(kind="linear")
RBF = KernelConfig(kind="rbf", bandwidth_sigma=1.0)


def _rows(seed=0, t=30, d=5):
    return np.random.default_rng(seed).standard_normal((t, d))


def _pca_scores(rows, p):
    """Covariance-eigendecomposition PCA oracle (sample covariance, ddof irrelevant
    to the score directions; scaling follows X_c @ V)."""
    xc = rows - rows.mean(axis=0)
    cov = xc.T @ xc / rows.shape[0]
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    return xc @ vecs[:, order[:p]]


def test_known_eigenvalues_three_points():
    # rows (1,0),(0,1),(-1,-1): centered Gram over T has eigenvalues 1 and 1/3
    rows = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    model = fit_kpca(rows, LINEAR)
    np.testing.assert_allclose(model.eigenvalues, [1.0, 1.0 / 3.0], atol=1e-12)


def test_linear_kernel_scores_match_pca_oracle():
    rows = _rows(seed=1, t=40, d=6)
    model = fit_kpca(rows, LINEAR, n_components=4)
    scores = train_scores(model)
    oracle = _pca_scores(rows, 4)
    for p in range(4):
        s, o = scores[:, p], oracle[:, p]
        sign = 1.0 if abs(s @ o) == 0 else np.sign(s @ o)
        np.testing.assert_allclose(s, sign * o, atol=1e-6)


def test_train_score_variance_matches_eigenvalue():
    rows = _rows(seed=2, t=50)
    model = fit_kpca(rows, RBF)
    scores = train_scores(model)
    t = rows.shape[0]
    expected = model.eigenvalues * t / (t - 1)
    np.testing.assert_allclose(scores.var(axis=0, ddof=1), expected, rtol=1e-8)


def test_project_training_rows_reproduces_train_scores():
    rows = _rows(seed=3, t=25)
    model = fit_kpca(rows, RBF)
    np.testing.assert_allclose(project(model, rows), train_scores(model), atol=1e-8)


def test_project_constant_row_near_mean_score():
    # projecting the feature-space mean itself gives scores ~0 for linear kernel
    rows = _rows(seed=4, t=20)
    model = fit_kpca(rows, LINEAR)
    mean_row = rows.mean(axis=0, keepdims=True)
    np.testing.assert_allclose(project(model, mean_row), 0.0, atol=1e-9)


def test_eigen_floor_drops_null_directions():
    rows = _rows(seed=5, t=30, d=3)
    model = fit_kpca(rows, LINEAR)
    # linear kernel rank is at most d after centering
    assert model.n_components <= 3


def test_component_request_clamped_with_warning():
    rows = _rows(seed=6, t=20, d=3)
    with pytest.warns(RankDeficientWarning):
        model = fit_kpca(rows, LINEAR, n_components=10)
    assert model.n_components <= 3


def test_degenerate_input_single_zero_component():
    rows = np.ones((8, 2))
    with pytest.warns(RankDeficientWarning):
        model = fit_kpca(rows, LINEAR)
    assert model.n_components == 1
    np.testing.assert_allclose(model.eigenvalues, [0.0])
    np.testing.assert_allclose(train_scores(model), 0.0)


def test_choose_component_count_rules():
    rows = _rows(seed=7, t=40, d=6)
    model = fit_kpca(rows, LINEAR)
    assert choose_component_count(model, 3) == 3
    p = choose_component_count(model, 0.9)
    ratios = np.cumsum(model.eigenvalues) / model.total_variance
    assert ratios[p - 1] >= 0.9
    assert p == 1 or ratios[p - 2] < 0.9
    # integer rule clamps to available rank
    assert choose_component_count(model, 99) == model.n_components
    with pytest.raises(ShapeError):
        choose_component_count(model, 0)
    with pytest.raises(ShapeError):
        choose_component_count(model, 1.5)
    with pytest.raises(ShapeError):
        choose_component_count(model, 1.0)  # fraction rule is open-interval


def test_truncate_keeps_leading_components():
    rows = _rows(seed=8, t=30)
    model = fit_kpca(rows, RBF)
    small = truncate(model, 2)
    assert small.n_components == 2
    np.testing.assert_allclose(small.eigenvalues, model.eigenvalues[:2])
    np.testing.assert_allclose(train_scores(small), train_scores(model)[:, :2])


def test_preimage_matches_pca_truncation_error():
    # with a linear kernel, score->input reconstruction error equals the
    # classical PCA truncation error
    rows = _rows(seed=9, t=50, d=6)
    for p in (2, 4, 6):
        model = fit_kpca(rows, LINEAR, n_components=p)
        scores = train_scores(model)
        pre = fit_preimage(scores, rows)
        recon = reconstruct(pre, scores)
        oracle = _pca_scores(rows, p)
        xc = rows - rows.mean(axis=0)
        proj = oracle @ np.linalg.lstsq(oracle, xc, rcond=None)[0]
        expected = float(np.sqrt(np.mean((xc - proj) ** 2)))
        got = float(np.sqrt(np.mean((rows - recon) ** 2)))
        assert got == pytest.approx(expected, abs=1e-6)


def test_preimage_full_rank_linear_is_exact():
    rows = _rows(seed=10, t=40, d=4)
    model = fit_kpca(rows, LINEAR)
    scores = train_scores(model)
    pre = fit_preimage(scores, rows)
    np.testing.assert_allclose(reconstruct(pre, scores), rows, atol=1e-8)
    assert pre.residual_rmse == pytest.approx(0.0, abs=1e-8)


def test_preimage_error_nonincreasing_in_components():
    rows = _rows(seed=11, t=60, d=8)
    model = fit_kpca(rows, RBF)
    errors = []
    for p in range(1, model.n_components + 1):
        scores = train_scores(truncate(model, p))
        pre = fit_preimage(scores, rows)
        errors.append(pre.residual_rmse)
    assert all(a >= b - 1e-10 for a, b in zip(errors, errors[1:]))


def test_preimage_intercept_reproduces_mean():
    rows = _rows(seed=12, t=30)
    model = fit_kpca(rows, RBF, n_components=3)
    scores = train_scores(model)
    pre = fit_preimage(scores, rows)
    # centered scores: zero score vector maps to the training mean
    np.testing.assert_allclose(
        reconstruct(pre, np.zeros((1, 3))).ravel(), rows.mean(axis=0), atol=1e-8
    )
