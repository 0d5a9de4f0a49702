#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
评估指标模块
R²、调整 R²、MAE、MSE、RMSE
"""
import math
from typing import Dict, Sequence

import attr
import numpy as np

from errors import DegenerateTarget, InsufficientSamples, LengthMismatch


@attr.s(frozen=True, slots=True)
class MetricsReport:
    r2: float = attr.ib()
    adjusted_r2: float = attr.ib()
    mae: float = attr.ib()
    mse: float = attr.ib()
    rmse: float = attr.ib()
    n: int = attr.ib()
    k: int = attr.ib()

    def as_row(self) -> Dict[str, float]:
        return {"R2": self.r2, "AdjR2": self.adjusted_r2, "MAE": self.mae, "MSE": self.mse, "RMSE": self.rmse}


def evaluate(y: Sequence[float], yhat: Sequence[float], k: int) -> MetricsReport:
    """
    计算五项回归指标

    R² = 1 - SS_res / SS_tot，可以为负，不做截断
    调整 R² = 1 - (1 - R²)(n - 1) / (n - k - 1)，k 不含常数项

    :param y: 真实值
    :param yhat: 预测值
    :param k: 模型自变量个数
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.shape != yhat.shape:
        raise LengthMismatch(y.size, yhat.size)
    n = int(y.size)
    if n <= k + 1:
        raise InsufficientSamples(n, k)

    residual = y - yhat
    mean = math.fsum(y.tolist()) / n
    ss_tot = math.fsum(((y - mean) ** 2).tolist())
    if ss_tot == 0.0:
        raise DegenerateTarget()
    ss_res = math.fsum((residual ** 2).tolist())

    r2 = 1.0 - ss_res / ss_tot
    adjusted = 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)
    mse = ss_res / n
    return MetricsReport(
        r2=r2,
        adjusted_r2=adjusted,
        mae=math.fsum(np.abs(residual).tolist()) / n,
        mse=mse,
        rmse=math.sqrt(mse),
        n=n,
        k=int(k),
    )
