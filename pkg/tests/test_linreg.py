import math

import numpy as np
import pytest

import reference
from errors import InsufficientSamples, MissingFeature, SingularDesign
from linreg import LinearModel, compare_intercept, fit_linear, predict_linear
from Property import FEATURES, FEATURE_NAMES, PropertyRecord
from tests.conftest import dataset_from, valid_row


class TestFit:
    def test_exact_line(self, logger):
        x = np.arange(10, dtype=float)
        model = fit_linear(dataset_from(x, 2 * x + 3), subset=[0], logger=logger)
        assert model.coefficients[0] == pytest.approx(2.0, abs=1e-9)
        assert model.intercept == pytest.approx(3.0, abs=1e-9)
        assert not model.regularized

    def test_matches_normal_equations(self, logger):
        rng = np.random.default_rng(30)
        for _ in range(50):
            x = rng.normal(size=(200, 26))
            y = x @ rng.normal(size=26) + 4.0 + rng.normal(scale=0.5, size=200)
            model = fit_linear(dataset_from(x, y), logger=logger)

            a = np.column_stack([np.ones(200), x])
            oracle = np.linalg.solve(a.T @ a, a.T @ y)
            assert model.intercept == pytest.approx(oracle[0], rel=1e-8, abs=1e-10)
            assert np.allclose(model.coefficients, oracle[1:], rtol=1e-8, atol=1e-10)

            residual = y - model.predict_matrix(x)
            scale = np.linalg.norm(a, axis=0) * np.linalg.norm(y)
            assert np.all(np.abs(a.T @ residual) <= 1e-6 * scale)

    def test_rank_deficient_falls_back_to_min_norm(self, logger):
        rng = np.random.default_rng(31)
        x = rng.normal(size=(60, 3))
        x[:, 2] = x[:, 0] + x[:, 1]
        y = x[:, 0] - 2 * x[:, 1] + 1
        model = fit_linear(dataset_from(x, y), subset=[0, 1, 2], logger=logger)
        assert model.regularized
        assert np.all(np.isfinite(model.coefficients))
        assert model.intercept == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(model.predict_matrix(dataset_from(x, y).features), y, atol=1e-9)

    def test_emotion_block_keeps_raw_scale_intercept(self, logger):
        rng = np.random.default_rng(32)
        n = 300
        counts = rng.integers(1, 30, size=(n, 5)).astype(float)
        emotions = 100.0 * counts / counts.sum(axis=1, keepdims=True)
        year = rng.integers(1990, 2020, n).astype(float)
        x = np.zeros((n, 26))
        x[:, 0] = year
        x[:, 21:] = emotions
        y = 600000.0 - 250.0 * year + emotions @ np.array([200.0, 900.0, 30.0, 40.0, 0.0]) + rng.normal(0, 50, n)
        data = dataset_from(x, y)
        subset = [0, 21, 22, 23, 24, 25]
        model = fit_linear(data, subset=subset, logger=logger)
        assert model.regularized

        # 去掉最后一列求满秩解，再减去零空间方向 (0, 1, 1, 1, 1, 1) 上的分量即得最小范数解
        a = np.column_stack([np.ones(n), x[:, subset[:-1]]])
        solution, *_ = np.linalg.lstsq(a, y, rcond=None)
        beta = np.append(solution[1:], 0.0)
        null = np.array([0.0, 1, 1, 1, 1, 1]) / np.sqrt(5.0)
        beta = beta - (beta @ null) * null
        oracle = y.mean() - x[:, subset].mean(axis=0) @ beta
        assert model.intercept == pytest.approx(oracle, rel=1e-6)
        assert np.allclose(model.coefficients, beta, rtol=1e-6, atol=1e-6)

        full_rank = fit_linear(data, subset=subset[:-1], logger=logger)
        assert not full_rank.regularized
        assert np.allclose(model.predict_matrix(x), full_rank.predict_matrix(x), rtol=1e-8)

    def test_strict_mode_raises_with_condition(self, logger):
        t = np.arange(1000.0) / 1000.0
        nearly_double = 2 * t + 1e-13 * np.random.default_rng(34).normal(size=t.size)
        x = np.column_stack([t, nearly_double])
        with pytest.raises(SingularDesign) as info:
            fit_linear(dataset_from(x, t), subset=[0, 1], strict=True, logger=logger)
        assert math.isfinite(info.value.condition)
        assert info.value.condition > 1e10
        assert (info.value.rank, info.value.width) == (2, 3)

    def test_record_order_does_not_matter(self, small_dataset, logger):
        order = np.random.default_rng(33).permutation(len(small_dataset))
        shuffled = small_dataset.take(order)
        a = fit_linear(small_dataset, logger=logger)
        b = fit_linear(shuffled, logger=logger)
        assert b.intercept == pytest.approx(a.intercept, rel=1e-7)
        assert np.allclose(b.coefficients, a.coefficients, rtol=1e-7, atol=1e-6)

    def test_too_few_rows(self, logger):
        with pytest.raises(InsufficientSamples):
            fit_linear(dataset_from(np.ones((3, 26)), [1, 2, 3]), logger=logger)


class TestPredict:
    def test_all_zero_row_is_intercept(self):
        model = LinearModel(coefficients=[1.5] * 26, intercept=7.0, feature_subset=FEATURES)
        assert predict_linear(model, [0.0] * 26) == 7.0

    def test_single_feature(self):
        model = LinearModel(coefficients=[2.0], intercept=3.0, feature_subset=["Year"])
        assert predict_linear(model, {"Year": 5.0}) == 13.0

    def test_published_model_on_hand_row(self):
        model = LinearModel(
            coefficients=[reference.LINEAR_COEFFICIENTS[name] for name in FEATURE_NAMES],
            intercept=reference.LINEAR_INTERCEPT,
            feature_subset=FEATURES,
        )
        record = PropertyRecord.from_row(valid_row())
        oracle = reference.LINEAR_INTERCEPT + sum(
            reference.LINEAR_COEFFICIENTS[name] * value for name, value in zip(FEATURE_NAMES, record.features))
        assert predict_linear(model, record) == pytest.approx(oracle, rel=1e-9)
        assert model.predict_matrix(np.array([record.features]))[0] == pytest.approx(oracle, rel=1e-9)

    def test_missing_feature(self):
        model = LinearModel(coefficients=[2.0], intercept=3.0, feature_subset=["Year"])
        with pytest.raises(MissingFeature):
            predict_linear(model, {"Elvt": 1.0})

    def test_non_finite_coefficients_rejected(self):
        with pytest.raises(ValueError):
            LinearModel(coefficients=[float("nan")], intercept=0.0, feature_subset=["Year"])


def test_compare_intercept():
    model = LinearModel(coefficients=[0.0], intercept=reference.LINEAR_INTERCEPT * 1.005, feature_subset=["Year"])
    assert compare_intercept(model, reference.LINEAR_INTERCEPT)
    assert not compare_intercept(model, reference.LINEAR_INTERCEPT, tolerance=0.001)


@pytest.mark.public_data
def test_published_intercept(public_dataset, logger):
    from dataset import split

    train, _ = split(public_dataset)
    fits = [fit_linear(train, logger=logger), fit_linear(public_dataset, logger=logger)]
    assert any(compare_intercept(m, reference.LINEAR_INTERCEPT, reference.LINEAR_INTERCEPT_TOLERANCE) for m in fits)
