"""
房产交易数据集：27 列表头约定、CSV 读写与带种子的训练/测试划分
"""
import hashlib
import logging
import os
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
import pandas as pd

from errors import EmptyDataset, InvariantViolation, MissingColumn, ParseError
from Property import (
    AMENITY_COUNTS, AMENITY_DISTANCES, ELEVATOR, EMOTION_PERCENTAGES, FEATURE_COUNT, FEATURES,
    HEADER, MAX_AMENITY_DISTANCE, PRICE_COLUMN, PROPERTY_HEADER, ROOM_COUNTS,
    FeatureId, PropertyRecord, check_values, resolve_feature,
)
from utils.logutil import get_logger

DEFAULT_TRAIN_FRACTION = 0.7
DEFAULT_SEED = 42
MAX_SEED = 2 ** 64 - 1

PathLike = Union[str, os.PathLike]


def _check_fraction(instance, attribute, value):
    if not 0.0 < value < 1.0:
        raise ValueError(f"train_fraction 必须在 (0, 1) 内，实际 {value}")


def _check_seed(instance, attribute, value):
    if not 0 <= value <= MAX_SEED:
        raise ValueError(f"seed 必须是 64 位无符号整数，实际 {value}")


@attr.s(frozen=True, slots=True)
class SplitSpec:
    train_fraction: float = attr.ib(default=DEFAULT_TRAIN_FRACTION, converter=float, validator=_check_fraction)
    seed: int = attr.ib(default=DEFAULT_SEED, converter=int, validator=_check_seed)

    def train_size(self, n: int) -> int:
        """floor(n × train_fraction)，按十进制精确值计算 (28550 × 0.7 = 19985)"""
        return int(Fraction(repr(self.train_fraction)) * n)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@attr.s(frozen=True, slots=True, eq=False)
class Dataset:
    """
    列标注的特征矩阵 + 价格向量，构造后只读

    参数:
        features: n × 26 矩阵，列序同 FEATURES
        prices: 长度 n 的价格向量
        provenance: 来源文件或派生描述
    """
    features: np.ndarray = attr.ib(converter=_frozen)
    prices: np.ndarray = attr.ib(converter=_frozen)
    provenance: str = attr.ib(default="<memory>")

    def __attrs_post_init__(self):
        if self.features.ndim != 2 or self.features.shape[1] != FEATURE_COUNT:
            raise ValueError(f"特征矩阵必须是 n × {FEATURE_COUNT}，实际 {self.features.shape}")
        if self.prices.shape != (self.features.shape[0],):
            raise ValueError(f"价格向量长度 {self.prices.shape} 与特征行数 {self.features.shape[0]} 不一致")

    @property
    def schema(self) -> Tuple[FeatureId, ...]:
        return FEATURES

    @property
    def records(self) -> List[PropertyRecord]:
        return [PropertyRecord(features=row, price=price) for row, price in zip(self.features, self.prices)]

    def __len__(self) -> int:
        return int(self.prices.shape[0])

    def columns(self, subset: Sequence[Union[int, str, FeatureId]]) -> np.ndarray:
        """按特征子集取出 n × |subset| 矩阵"""
        indices = [resolve_feature(f).index for f in subset]
        return self.features[:, indices]

    def take(self, indices: Sequence[int], label: str = "subset") -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[indices], self.prices[indices], f"{self.provenance}[{label}]")

    def matrix(self) -> np.ndarray:
        """n × 27 矩阵，最后一列为价格"""
        return np.column_stack([self.features, self.prices])

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.matrix(), columns=list(HEADER))

    def equals(self, other: "Dataset") -> bool:
        return (np.array_equal(self.features, other.features)
                and np.array_equal(self.prices, other.prices))

    @classmethod
    def from_records(cls, records: Iterable[PropertyRecord], provenance: str = "<memory>") -> "Dataset":
        records = list(records)
        if not records:
            return cls(np.empty((0, FEATURE_COUNT)), np.empty(0), provenance)
        return cls(
            np.array([r.features for r in records], dtype=np.float64),
            np.array([r.price for r in records], dtype=np.float64),
            provenance,
        )


def read_numeric_table(path: PathLike, header: Sequence[str]) -> np.ndarray:
    """
    读取表头逐字匹配的纯数值 CSV

    :param path: 文件路径
    :param header: 期望的表头 (大小写敏感，顺序敏感)
    :return: n × len(header) 的 float64 矩阵
    """
    source = str(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise MissingColumn(header, []) from None

    found = list(raw.columns)
    if found != list(header):
        raise MissingColumn(header, found)
    if raw.empty:
        raise EmptyDataset(source)

    cells = raw.to_numpy(dtype=object)
    numeric = np.empty(cells.shape, dtype=np.float64)
    for row, line in enumerate(cells):
        for col, cell in enumerate(line):
            try:
                value = float(cell)
            except ValueError:
                value = float("nan")
            if not np.isfinite(value):
                raise ParseError(row + 1, header[col], cell, source)
            numeric[row, col] = value
    return numeric


def _first_violation(features: np.ndarray, prices: np.ndarray) -> Optional[int]:
    """向量化地找出第一条不合法记录的下标，全部合法时返回 None"""
    bad = prices <= 0
    bad |= ~np.isin(features[:, ELEVATOR], (0.0, 1.0))
    rooms = features[:, list(ROOM_COUNTS)]
    bad |= ((rooms < 0) | (rooms != np.floor(rooms))).any(axis=1)
    bad |= (features[:, list(AMENITY_COUNTS)] < 0).any(axis=1)
    distances = features[:, list(AMENITY_DISTANCES)]
    bad |= ((distances < 0) | (distances > MAX_AMENITY_DISTANCE)).any(axis=1)
    emotions = features[:, list(EMOTION_PERCENTAGES)]
    bad |= ((emotions < 0) | (emotions > 100)).any(axis=1)
    hits = np.flatnonzero(bad)
    return int(hits[0]) if hits.size else None


def validate(data: Dataset) -> None:
    """逐条检查记录约束，失败时报告 1 起始的数据行号"""
    row = _first_violation(data.features, data.prices)
    if row is None:
        return
    field, reason = check_values(data.features[row], data.prices[row])[0]
    raise InvariantViolation(row + 1, field, reason)


def ingest_csv(path: PathLike, logger: Optional[logging.Logger] = None) -> Dataset:
    """
    读取 27 列房产表 (26 特征 + Price)，保持行序

    :param path: CSV 文件路径，UTF-8，逗号分隔
    :return: Dataset
    """
    logger = logger or get_logger()
    table = read_numeric_table(path, HEADER)
    data = Dataset(table[:, :FEATURE_COUNT], table[:, FEATURE_COUNT], str(path))
    validate(data)
    logger.info(f"已读取 {len(data)} 条房产记录: {path}")
    return data


def ingest_property_csv(path: PathLike, logger: Optional[logging.Logger] = None) -> np.ndarray:
    """
    读取只含房产自身特征的表 (Year..Lng + Price)，供特征派生阶段使用

    :return: n × 9 矩阵
    """
    logger = logger or get_logger()
    table = read_numeric_table(path, PROPERTY_HEADER)
    for row, values in enumerate(table, start=1):
        padded = list(values[:8]) + [0.0] * (FEATURE_COUNT - 8)
        problems = check_values(padded, values[8])
        if problems:
            field, reason = problems[0]
            raise InvariantViolation(row, field, reason)
        if not (-90.0 <= values[6] <= 90.0 and -180.0 <= values[7] <= 180.0):
            raise InvariantViolation(row, "Lat/Lng", f"坐标越界 ({values[6]}, {values[7]})")
    logger.info(f"已读取 {len(table)} 条房产基础记录: {path}")
    return table


def write_csv(data: Dataset, path: PathLike) -> Path:
    """按最短可往返的浮点表示写出，ingest_csv 读回后逐位相同"""
    path = Path(path)
    if path.parent:
        path.parent.mkdir(parents=True, exist_ok=True)
    data.frame().to_csv(path, index=False, lineterminator="\n", float_format=None)
    return path


def split_indices(n: int, spec: SplitSpec) -> Tuple[np.ndarray, np.ndarray]:
    """带种子的均匀随机置换，再按前缀切分"""
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    cut = spec.train_size(n)
    return order[:cut], order[cut:]


def split(data: Dataset, spec: Optional[SplitSpec] = None) -> Tuple[Dataset, Dataset]:
    """
    将数据集随机划分为训练集与测试集

    :param data: 非空数据集
    :param spec: 划分参数，默认 70/30、种子 42
    :return: (train, test)
    """
    if len(data) == 0:
        raise EmptyDataset(data.provenance)
    spec = spec or SplitSpec()
    train_idx, test_idx = split_indices(len(data), spec)
    return data.take(train_idx, "train"), data.take(test_idx, "test")


def partition_digest(train_idx: np.ndarray, test_idx: np.ndarray) -> str:
    """划分结果的 SHA-256 指纹，用来确认所有消融单元共享同一划分"""
    digest = hashlib.sha256()
    digest.update(np.asarray(train_idx, dtype="<i8").tobytes())
    digest.update(b"|")
    digest.update(np.asarray(test_idx, dtype="<i8").tobytes())
    return digest.hexdigest()


def summarize(data: Dataset) -> pd.DataFrame:
    """每列的计数、均值、极值，供 ingest 子命令输出"""
    return data.frame().describe().T[["count", "mean", "std", "min", "max"]]
