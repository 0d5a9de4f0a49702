import math
from typing import List, Optional, Sequence, Tuple

import attr
import numpy as np

from dataset import Dataset
from errors import DegenerateColumn, EmptyDataset, LengthMismatch
from Property import HEADER

NA = "NA"


def pearson(u: Sequence[float], v: Sequence[float]) -> float:
    """
    Pearson 相关系数，先求均值再累加离差 (两遍法)

    :param u: 长度 >= 2 的序列
    :param v: 与 u 等长的序列
    :return: r ∈ [-1, 1]
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise LengthMismatch(u.size, v.size)
    if u.size < 2:
        raise LengthMismatch(u.size, 2)
    if np.all(u == u[0]):
        raise DegenerateColumn("u")
    if np.all(v == v[0]):
        raise DegenerateColumn("v")

    du = u - math.fsum(u.tolist()) / u.size
    dv = v - math.fsum(v.tolist()) / v.size
    su = math.fsum((du * du).tolist())
    sv = math.fsum((dv * dv).tolist())
    if su == 0.0:
        raise DegenerateColumn("u")
    if sv == 0.0:
        raise DegenerateColumn("v")
    r = math.fsum((du * dv).tolist()) / math.sqrt(su * sv)
    return min(1.0, max(-1.0, r))


@attr.s(frozen=True, slots=True, eq=False)
class CorrelationMatrix:
    """
    27 × 27 的相关系数矩阵；无定义的格子为 NaN，并在 defined 中标为 False
    """
    labels: Tuple[str, ...] = attr.ib(converter=tuple)
    values: np.ndarray = attr.ib()

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    def get(self, a: str, b: str) -> Optional[float]:
        value = self.values[self.index_of(a), self.index_of(b)]
        return None if math.isnan(value) else float(value)

    def price_row(self) -> List[Tuple[str, Optional[float]]]:
        """价格与各特征的相关系数"""
        return [(label, self.get("Price", label)) for label in self.labels if label != "Price"]

    def strongest_pairs(self, k: int = 10) -> List[Tuple[str, str, float]]:
        """|r| 最大的 k 对不同特征，按 |r| 降序、再按行列序"""
        pairs = []
        n = len(self.labels)
        for i in range(n):
            for j in range(i + 1, n):
                value = self.values[i, j]
                if not math.isnan(value):
                    pairs.append((-abs(value), i, j, value))
        pairs.sort()
        return [(self.labels[i], self.labels[j], float(v)) for _, i, j, v in pairs[:k]]

    def to_csv_rows(self) -> List[List[str]]:
        """首行为表头，无定义的格子写作 NA"""
        rows = [[""] + list(self.labels)]
        for label, line in zip(self.labels, self.values):
            rows.append([label] + [NA if math.isnan(v) else repr(float(v)) for v in line])
        return rows


def correlation_matrix(data: Dataset) -> CorrelationMatrix:
    """
    全部 27 列 (26 特征 + Price) 两两计算 Pearson r

    方差为零的列整行整列标为无定义，其余格子照常计算。
    """
    if len(data) < 2:
        raise EmptyDataset(f"{data.provenance} (相关分析至少需要 2 条记录)")
    matrix = data.matrix()
    width = matrix.shape[1]
    constant = [bool(np.all(matrix[:, i] == matrix[0, i])) for i in range(width)]
    values = np.full((width, width), np.nan)
    for i in range(width):
        if constant[i]:
            continue
        values[i, i] = 1.0
        for j in range(i + 1, width):
            if constant[j]:
                continue
            values[i, j] = values[j, i] = pearson(matrix[:, i], matrix[:, j])
    values.setflags(write=False)
    return CorrelationMatrix(HEADER, values)
