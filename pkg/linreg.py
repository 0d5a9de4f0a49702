"""
线性回归模型 y = Σ αᵢ xᵢ + β，最小二乘用正交分解 (QR) 求解
"""
import logging
import math
from typing import Mapping, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from dataset import Dataset
from errors import EmptyDataset, InsufficientSamples, MissingFeature, SingularDesign
from Property import FEATURE_COUNT, FEATURES, FeatureId, PropertyRecord, resolve_feature
from utils.logutil import get_logger

Row = Union[PropertyRecord, Mapping[str, float], Sequence[float], np.ndarray]


def _finite(instance, attribute, value):
    values = value if isinstance(value, tuple) else (value,)
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"{attribute.name} 含有非有限数值")


@attr.s(frozen=True, slots=True)
class LinearModel:
    """
    参数:
        coefficients: 与 feature_subset 一一对应的系数 (人民币/平方米 每单位特征)
        intercept: 截距 β
        feature_subset: 实际参与拟合的特征
        condition: 设计矩阵 R 因子的条件数估计
        regularized: 是否因秩亏改用了中心化最小范数解
    """
    coefficients: Tuple[float, ...] = attr.ib(converter=lambda v: tuple(float(x) for x in v), validator=_finite)
    intercept: float = attr.ib(converter=float, validator=_finite)
    feature_subset: Tuple[FeatureId, ...] = attr.ib(converter=lambda v: tuple(resolve_feature(f) for f in v))
    condition: float = attr.ib(default=float("nan"), eq=False)
    regularized: bool = attr.ib(default=False, eq=False)

    def __attrs_post_init__(self):
        if len(self.coefficients) != len(self.feature_subset):
            raise ValueError(f"系数个数 {len(self.coefficients)} 与特征个数 {len(self.feature_subset)} 不一致")

    def predict_matrix(self, features: np.ndarray) -> np.ndarray:
        """features 为 n × 26 的完整特征矩阵"""
        features = np.asarray(features, dtype=np.float64)
        columns = features[:, [f.index for f in self.feature_subset]]
        return columns @ np.asarray(self.coefficients) + self.intercept


def design_matrix(columns: np.ndarray) -> np.ndarray:
    """在特征列前加一列全 1 作为截距项"""
    return np.column_stack([np.ones(columns.shape[0]), columns])


def _condition(r: np.ndarray) -> float:
    with np.errstate(divide="ignore"):
        return float(np.linalg.cond(r))


def centred_min_norm(columns: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    秩亏时的解：特征列和 y 先中心化，系数取最小范数最小二乘解，截距由均值还原，不受范数约束

    返回:
        (截距, 系数)
    """
    mean_x = columns.mean(axis=0)
    mean_y = float(y.mean())
    beta, *_ = np.linalg.lstsq(columns - mean_x, y - mean_y, rcond=None)
    return mean_y - float(mean_x @ beta), beta


def fit_linear(
        train: Dataset,
        subset: Optional[Sequence[Union[int, str, FeatureId]]] = None,
        strict: bool = False,
        logger: Optional[logging.Logger] = None,
) -> LinearModel:
    """
    最小化残差平方和，不做特征标准化

    参数:
        train: 训练集
        subset: 参与拟合的特征，默认全部 26 个
        strict: True 时秩亏直接抛 SingularDesign，否则改用中心化最小范数解并告警
    """
    logger = logger or get_logger()
    subset = tuple(resolve_feature(f) for f in (subset if subset is not None else FEATURES))
    n = len(train)
    if n == 0:
        raise EmptyDataset(train.provenance)
    if n <= len(subset) + 1:
        raise InsufficientSamples(n, len(subset))

    columns = train.columns(subset)
    a = design_matrix(columns)
    y = train.prices
    q, r = np.linalg.qr(a, mode="reduced")
    diag = np.abs(np.diag(r))
    tol = max(a.shape) * np.finfo(np.float64).eps * diag.max()
    rank = int(np.count_nonzero(diag > tol))
    condition = _condition(r)

    regularized = rank < a.shape[1]
    if regularized:
        if strict:
            raise SingularDesign(condition, rank, a.shape[1])
        intercept, coefficients = centred_min_norm(columns, y)
        logger.warning(f"设计矩阵秩亏 (rank={rank}/{a.shape[1]})，改用中心化最小范数解继续拟合")
    else:
        solution = np.linalg.solve(r, q.T @ y)
        intercept, coefficients = solution[0], solution[1:]

    model = LinearModel(
        coefficients=coefficients,
        intercept=intercept,
        feature_subset=subset,
        condition=condition,
        regularized=regularized,
    )
    logger.debug(f"线性模型拟合完成: n={n}, k={len(subset)}, 截距={model.intercept:.6f}, 条件数≈{condition:.3e}")
    return model


def _row_values(row: Row) -> Union[Mapping[str, float], Sequence[float]]:
    if isinstance(row, PropertyRecord):
        return row.features
    return row


def row_value(row: Row, feature: FeatureId) -> float:
    """从记录、字典或 26 维序列中取单个特征，缺失时抛 MissingFeature"""
    values = _row_values(row)
    if isinstance(values, Mapping):
        if feature.name not in values:
            raise MissingFeature(feature.name)
        return float(values[feature.name])
    if len(values) != FEATURE_COUNT:
        raise MissingFeature(feature.name)
    return float(values[feature.index])


def predict_linear(model: LinearModel, features: Row) -> float:
    """点积加截距"""
    return math.fsum(
        coefficient * row_value(features, feature)
        for feature, coefficient in zip(model.feature_subset, model.coefficients)
    ) + model.intercept


def compare_intercept(model: LinearModel, reference: float, tolerance: float = 0.01) -> bool:
    """截距是否落在参考值的相对容差内"""
    return abs(model.intercept - reference) <= tolerance * abs(reference)
