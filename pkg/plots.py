"""
SVG 图表输出：实际值-预测值散点、残差图、误差直方图、相关热力图、特征重要性条形图

固定 svg.hashsalt、不写日期元数据、文字不转路径，相同输入得到相同字节。
"""
import enum
import os
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

import attr
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from errors import ReportIoError  # noqa: E402

PathLike = Union[str, os.PathLike]

_STYLE = {
    "svg.hashsalt": "pate-report",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
}


class PlotKind(str, enum.Enum):
    SCATTER_ACTUAL_VS_PREDICTED = "scatter_actual_vs_predicted"
    RESIDUALS_VS_PREDICTED = "residuals_vs_predicted"
    ERROR_HISTOGRAM = "error_histogram"
    CORRELATION_HEATMAP = "correlation_heatmap"
    IMPORTANCE_BAR = "importance_bar"


@attr.s(frozen=True, slots=True)
class PlotSpec:
    """
    参数:
        kind: 图类型
        source: 数据来源说明，如 'XGBoost regression w/ PATS / Testing set'
        output: SVG 输出路径
    """
    kind: PlotKind = attr.ib(converter=PlotKind)
    source: str = attr.ib()
    output: Path = attr.ib(converter=Path)


def _save(fig, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    except OSError as e:
        raise ReportIoError(str(path), str(e)) from None
    finally:
        plt.close(fig)
    return path


def _scatter(ax, actual: np.ndarray, predicted: np.ndarray, title: str) -> None:
    ax.scatter(actual, predicted, s=4, alpha=0.4, color="#1f77b4", rasterized=False)
    low = float(min(actual.min(), predicted.min()))
    high = float(max(actual.max(), predicted.max()))
    ax.plot([low, high], [low, high], color="red", linewidth=1.2)
    ax.set_xlabel("Actual price (RMB/m²)")
    ax.set_ylabel("Predicted price (RMB/m²)")
    ax.set_title(title)


def _residuals(ax, actual: np.ndarray, predicted: np.ndarray, title: str) -> None:
    ax.scatter(predicted, actual - predicted, s=4, alpha=0.4, color="#2ca02c")
    ax.axhline(0.0, color="red", linewidth=1.2)
    ax.set_xlabel("Predicted price (RMB/m²)")
    ax.set_ylabel("Residual (RMB/m²)")
    ax.set_title(title)


def _histogram(ax, actual: np.ndarray, predicted: np.ndarray, title: str) -> None:
    ax.hist(actual - predicted, bins=50, color="#ff7f0e", edgecolor="white")
    ax.set_xlabel("Error (RMB/m²)")
    ax.set_ylabel("Count")
    ax.set_title(title)


_PREDICTION_PLOTS = {
    PlotKind.SCATTER_ACTUAL_VS_PREDICTED: _scatter,
    PlotKind.RESIDUALS_VS_PREDICTED: _residuals,
    PlotKind.ERROR_HISTOGRAM: _histogram,
}


def render_predictions(spec: PlotSpec, actual: Sequence[float], predicted: Sequence[float]) -> Path:
    draw = _PREDICTION_PLOTS.get(spec.kind)
    if draw is None:
        raise ValueError(f"{spec.kind.value} 不是预测类图表")
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6, 5))
        draw(ax, np.asarray(actual, dtype=float), np.asarray(predicted, dtype=float), spec.source)
        fig.tight_layout()
        return _save(fig, spec.output)


def render_heatmap(spec: PlotSpec, labels: Sequence[str], values: np.ndarray) -> Path:
    """NaN 格子 (无定义) 以灰色显示"""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(11, 9.5))
        values = np.asarray(values, dtype=float)
        cmap = matplotlib.colormaps["RdBu_r"].copy()
        cmap.set_bad("#cccccc")
        image = ax.imshow(np.ma.masked_invalid(values), cmap=cmap, vmin=-1.0, vmax=1.0)
        ax.set_xticks(range(len(labels)))
        ax.set_yticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=90, fontsize=7)
        ax.set_yticklabels(labels, fontsize=7)
        ax.grid(False)
        for (i, j), value in np.ndenumerate(values):
            if np.isfinite(value):
                ax.text(j, i, f"{value:.1f}", ha="center", va="center", fontsize=5)
        fig.colorbar(image, ax=ax, fraction=0.046, pad=0.04)
        ax.set_title(spec.source)
        fig.tight_layout()
        return _save(fig, spec.output)


def render_importance(spec: PlotSpec, ranking: Sequence[Tuple[str, int]]) -> Path:
    """水平条形图，最重要的特征在最上方"""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(7, 8))
        names = [name for name, _ in ranking][::-1]
        counts = [count for _, count in ranking][::-1]
        ax.barh(range(len(names)), counts, color="#1f77b4")
        ax.set_yticks(range(len(names)))
        ax.set_yticklabels(names, fontsize=8)
        for y, count in enumerate(counts):
            ax.text(count, y, f" {count}", va="center", fontsize=7)
        ax.set_xlabel("F score")
        ax.set_title(spec.source)
        fig.tight_layout()
        return _save(fig, spec.output)


def render(spec: PlotSpec, payload: Dict[str, object]) -> Path:
    """
    按 PlotSpec.kind 分派

    payload 键: actual/predicted (预测类)、labels/values (热力图)、ranking (重要性)
    """
    if spec.kind in _PREDICTION_PLOTS:
        return render_predictions(spec, payload["actual"], payload["predicted"])
    if spec.kind is PlotKind.CORRELATION_HEATMAP:
        return render_heatmap(spec, payload["labels"], payload["values"])
    return render_importance(spec, payload["ranking"])
