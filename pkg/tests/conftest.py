import logging
import os
from pathlib import Path

import numpy as np
import pytest

from dataset import Dataset, ingest_csv, write_csv
from Property import FEATURE_COUNT, HEADER
from synth import synthetic_dataset

PUBLIC_DATA_ENV = "PATE_PUBLIC_DATA"


@pytest.fixture
def logger() -> logging.Logger:
    return logging.getLogger("pate.tests")


@pytest.fixture(scope="session")
def small_dataset() -> Dataset:
    return synthetic_dataset(100, seed=3)


@pytest.fixture
def small_csv(tmp_path, small_dataset) -> Path:
    return write_csv(small_dataset, tmp_path / "h.csv")


@pytest.fixture(scope="session")
def public_dataset() -> Dataset:
    path = os.environ.get(PUBLIC_DATA_ENV)
    if not path or not Path(path).exists():
        pytest.skip(f"未设置 {PUBLIC_DATA_ENV} 或文件不存在，跳过公开数据集上的复现检查")
    return ingest_csv(path, logger=logging.getLogger("pate.tests"))


def valid_row(**overrides) -> np.ndarray:
    """一条满足全部记录约束的 27 值行 (26 特征 + Price)"""
    row = np.array(
        [2005, 1, 2, 1, 1, 1, 39.9, 116.4]
        + [3, 400.0] * 6
        + [35.0]
        + [20.0, 10.0, 40.0, 20.0, 10.0]
        + [52000.0],
        dtype=np.float64,
    )
    for name, value in overrides.items():
        row[HEADER.index(name)] = value
    return row


def dataset_from(features, prices, provenance: str = "<test>") -> Dataset:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features.reshape(-1, 1)
    if features.shape[1] < FEATURE_COUNT:
        features = np.column_stack([features, np.zeros((features.shape[0], FEATURE_COUNT - features.shape[1]))])
    return Dataset(features, np.asarray(prices, dtype=np.float64), provenance)
