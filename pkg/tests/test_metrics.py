import math

import numpy as np
import pytest

from errors import DegenerateTarget, InsufficientSamples, LengthMismatch
from metrics import evaluate


def test_perfect_prediction():
    report = evaluate([1, 2, 3], [1, 2, 3], k=1)
    assert (report.r2, report.mae, report.mse, report.rmse) == (1.0, 0.0, 0.0, 0.0)


def test_constant_predictor():
    y = [1.0, 2.0, 3.0]
    mean = math.fsum(y) / len(y)
    report = evaluate(y, [mean] * 3, k=0)
    assert report.r2 == 0.0
    report = evaluate(y, [2, 2, 2], k=1)
    assert report.mae == pytest.approx(2 / 3)
    assert report.mse == pytest.approx(2 / 3)
    assert report.rmse == pytest.approx(math.sqrt(2 / 3))
    assert report.r2 == pytest.approx(0.0, abs=1e-15)


def test_adjusted_r2():
    # SS_tot = 10 × var，构造 SS_res = SS_tot / 2 使 R² = 0.5
    y = np.arange(10, dtype=float)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    yhat = y.copy()
    yhat[0] += math.sqrt(ss_tot / 2)
    report = evaluate(y, yhat, k=2)
    assert report.r2 == pytest.approx(0.5, abs=1e-12)
    assert report.adjusted_r2 == pytest.approx(1 - 0.5 * 9 / 7, abs=1e-12)


def test_r2_can_be_negative():
    assert evaluate([1, 2, 3, 4], [4, 3, 2, 1], k=1).r2 < 0


def test_identities_against_direct_oracle():
    rng = np.random.default_rng(20)
    for _ in range(1000):
        y = rng.normal(100, 20, 50)
        yhat = y + rng.normal(0, 5, 50)
        k = int(rng.integers(1, 10))
        report = evaluate(y, yhat, k)
        residual = y - yhat
        r2 = 1 - (residual ** 2).sum() / ((y - y.mean()) ** 2).sum()
        assert report.mae <= report.rmse
        assert report.rmse ** 2 == pytest.approx(report.mse, rel=1e-12)
        assert report.r2 == pytest.approx(r2, rel=1e-10)
        assert report.adjusted_r2 == pytest.approx(1 - (1 - r2) * 49 / (49 - k), rel=1e-10)
        assert report.mae == pytest.approx(np.abs(residual).mean(), rel=1e-10)
        assert report.mse == pytest.approx((residual ** 2).mean(), rel=1e-10)
        assert report.adjusted_r2 <= report.r2 <= 1


def test_errors():
    with pytest.raises(LengthMismatch):
        evaluate([1, 2, 3], [1, 2], k=1)
    with pytest.raises(DegenerateTarget):
        evaluate([5, 5, 5, 5], [5, 5, 5, 5], k=1)
    with pytest.raises(InsufficientSamples):
        evaluate([1, 2, 3], [1, 2, 3], k=2)


def test_row_layout():
    assert list(evaluate([1, 2, 3, 5], [1, 2, 4, 5], k=1).as_row()) == ["R2", "AdjR2", "MAE", "MSE", "RMSE"]
