import math

import numpy as np
import pytest

from errors import DegenerateColumn, EmptyDataset, LengthMismatch
from Property import HEADER
from stats import NA, correlation_matrix, pearson
from synth import synthetic_dataset
from tests.conftest import dataset_from


def _direct(u, v) -> float:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    du, dv = u - u.mean(), v - v.mean()
    return float((du * dv).sum() / math.sqrt((du * du).sum() * (dv * dv).sum()))


class TestPearson:
    def test_exact_positive(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-15)

    def test_exact_negative(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)

    def test_hand_evaluated(self):
        assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    def test_matches_direct_formula(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            n = int(rng.integers(2, 60))
            u, v = rng.normal(size=n), rng.normal(size=n)
            assert pearson(u, v) == pytest.approx(_direct(u, v), abs=1e-12)

    def test_symmetric_and_affine_invariant(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            u, v = rng.normal(size=40), rng.normal(size=40)
            a, b = rng.uniform(0.1, 50.0) * rng.choice([-1.0, 1.0]), rng.uniform(-100.0, 100.0)
            assert pearson(u, v) == pytest.approx(pearson(v, u), abs=1e-12)
            assert pearson(u, a * u + b) == pytest.approx(math.copysign(1.0, a), abs=1e-12)
            assert pearson(a * u + b, v) == pytest.approx(math.copysign(1.0, a) * pearson(u, v), abs=1e-12)

    def test_constant_input(self):
        with pytest.raises(DegenerateColumn):
            pearson([5, 5, 5], [1, 2, 3])

    def test_length_checks(self):
        with pytest.raises(LengthMismatch):
            pearson([1, 2, 3], [1, 2])
        with pytest.raises(LengthMismatch):
            pearson([1], [2])


class TestCorrelationMatrix:
    def test_invariants_on_synthetic_data(self):
        matrix = correlation_matrix(synthetic_dataset(500, seed=12))
        values = matrix.values
        assert matrix.labels == HEADER
        assert values.shape == (27, 27)
        assert np.array_equal(values, values.T)
        assert np.all(np.diag(values) == 1.0)
        assert np.all(np.abs(values) <= 1.0 + 1e-12)

    def test_identical_columns(self):
        column = np.arange(1.0, 11.0)
        data = dataset_from(np.tile(column[:, None], (1, 26)), column)
        values = correlation_matrix(data).values
        assert np.allclose(values[~np.isnan(values)], 1.0, atol=1e-12)
        assert not np.isnan(values).any()

    def test_constant_column_is_undefined(self):
        data = synthetic_dataset(60, seed=1)
        features = np.array(data.features)
        features[:, 1] = 1.0
        matrix = correlation_matrix(dataset_from(features, data.prices))
        assert not matrix.defined[1].any()
        assert not matrix.defined[:, 1].any()
        assert matrix.get("Elvt", "Year") is None
        assert matrix.get("Year", "Price") is not None
        assert matrix.to_csv_rows()[2][1] == NA

        prices = dict(matrix.price_row())
        assert list(prices) == list(HEADER[:-1])
        assert prices["Elvt"] is None
        assert prices["Year"] == pytest.approx(pearson(data.features[:, 0], data.prices), abs=1e-12)

    def test_csv_rows_layout(self, small_dataset):
        rows = correlation_matrix(small_dataset).to_csv_rows()
        assert rows[0] == [""] + list(HEADER)
        assert [row[0] for row in rows[1:]] == list(HEADER)
        assert float(rows[1][1]) == 1.0

    def test_strongest_pairs_are_sorted(self, small_dataset):
        pairs = correlation_matrix(small_dataset).strongest_pairs(5)
        magnitudes = [abs(r) for _, _, r in pairs]
        assert magnitudes == sorted(magnitudes, reverse=True)

    def test_needs_two_records(self):
        with pytest.raises(EmptyDataset):
            correlation_matrix(dataset_from(np.ones((1, 26)), [1.0]))


@pytest.mark.public_data
def test_published_correlations(public_dataset):
    import reference

    matrix = correlation_matrix(public_dataset)
    for (a, b), expected in reference.CORRELATIONS.items():
        assert matrix.get(a, b) == pytest.approx(expected, abs=0.05)
