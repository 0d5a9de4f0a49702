"""
消融实验、报告输出与命令行入口

5 种特征设置 × {线性回归, 提升树} 共 10 个单元，全部共享同一次训练/测试划分。
"""
import enum
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
import pandas as pd

import plots
import reference
from dataset import (
    Dataset, SplitSpec, ingest_csv, ingest_property_csv, partition_digest, split_indices, summarize, write_csv,
)
from errors import EmptyDataset, ModelFormatError, NoResults, PateError, ReportIoError
from gbt import BoostedEnsemble, BoostParams, feature_importance, fit_boosted
from geofeatures import derive_dataset, read_emotions, read_pois, read_traffic
from linreg import LinearModel, compare_intercept, fit_linear
from metrics import MetricsReport, evaluate
from modelstore import ModelStore, linear_to_dict
from Property import FEATURES, FeatureId
from stats import CorrelationMatrix, correlation_matrix
from utils.logutil import get_logger

TABLE3_COLUMNS = ("Data", "Method") + reference.METRIC_COLUMNS
NA = "NA"


def _subset(*ranges: range) -> Tuple[FeatureId, ...]:
    return tuple(FEATURES[i] for r in ranges for i in r)


CANONICAL_SUBSETS: Dict[str, Tuple[FeatureId, ...]] = {
    "w/ only P": _subset(range(0, 8)),
    "w/o A": _subset(range(0, 8), range(20, 26)),
    "w/o T": _subset(range(0, 20), range(21, 26)),
    "w/o S": _subset(range(0, 21)),
    "w/ PATS": _subset(range(0, 26)),
}

_ALIASES = {
    "only-p": "w/ only P", "no-a": "w/o A", "no-t": "w/o T", "no-s": "w/o S", "pats": "w/ PATS",
}


@attr.s(frozen=True, slots=True)
class AblationConfig:
    name: str = attr.ib()
    feature_subset: Tuple[FeatureId, ...] = attr.ib(converter=tuple)

    @name.validator
    def _check_name(self, attribute, value):
        if value not in CANONICAL_SUBSETS:
            raise ValueError(f"未知的消融设置: {value}")

    @feature_subset.validator
    def _check_subset(self, attribute, value):
        if value != CANONICAL_SUBSETS[self.name]:
            raise ValueError(f"{self.name} 的特征子集与固定定义不符")


ABLATION_CONFIGS: Tuple[AblationConfig, ...] = tuple(
    AblationConfig(name, subset) for name, subset in CANONICAL_SUBSETS.items()
)


def ablation_config(name: str) -> AblationConfig:
    """按规范名 ('w/o A') 或别名 ('no-A') 查找，未知名字抛 KeyError"""
    canonical = name if name in CANONICAL_SUBSETS else _ALIASES.get(name.strip().lower())
    if canonical is None:
        raise KeyError(name)
    return AblationConfig(canonical, CANONICAL_SUBSETS[canonical])


class ModelKind(str, enum.Enum):
    LINEAR = "linear"
    BOOSTED = "boosted"

    @property
    def label(self) -> str:
        return "Linear regression" if self is ModelKind.LINEAR else "XGBoost regression"


@attr.s(frozen=True, slots=True, eq=False)
class ExperimentResult:
    """
    一个消融单元的结果

    失败的单元 error 非空、两份指标为 None；成功的单元两份指标都在。
    test_actual / test_predicted 供出图使用。
    """
    config: AblationConfig = attr.ib()
    model_kind: ModelKind = attr.ib(converter=ModelKind)
    train_metrics: Optional[MetricsReport] = attr.ib()
    test_metrics: Optional[MetricsReport] = attr.ib()
    seed: int = attr.ib()
    params: Optional[BoostParams] = attr.ib(default=None)
    partition_digest: str = attr.ib(default="")
    error: Optional[str] = attr.ib(default=None)
    model: Optional[Union[LinearModel, BoostedEnsemble]] = attr.ib(default=None)
    test_actual: Optional[np.ndarray] = attr.ib(default=None)
    test_predicted: Optional[np.ndarray] = attr.ib(default=None)

    def __attrs_post_init__(self):
        has_metrics = self.train_metrics is not None and self.test_metrics is not None
        if self.error is None and not has_metrics:
            raise ValueError("成功的实验单元必须同时有训练集与测试集指标")

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def method(self) -> str:
        return f"{self.model_kind.label} {self.config.name}"

    def sort_key(self) -> Tuple[int, int]:
        return list(ModelKind).index(self.model_kind), ABLATION_CONFIGS.index(self.config)


@attr.s(frozen=True, slots=True)
class ReportBundle:
    directory: Path = attr.ib(converter=Path)
    files: Tuple[Path, ...] = attr.ib(converter=tuple)


def derive_boost_seed(seed: int) -> int:
    """划分直接使用 seed，提升树的种子由 seed 派生"""
    return int(np.random.SeedSequence(seed).generate_state(1, dtype=np.uint64)[0])


def _run_cell(
        config: AblationConfig,
        kind: ModelKind,
        train: Dataset,
        test: Dataset,
        params: BoostParams,
        seed: int,
        digest: str,
        logger: logging.Logger,
) -> ExperimentResult:
    cell_params = params if kind is ModelKind.BOOSTED else None
    label = f"{kind.label} {config.name}"
    try:
        if kind is ModelKind.LINEAR:
            model = fit_linear(train, config.feature_subset, logger=logger)
        else:
            model = fit_boosted(train, config.feature_subset, params, logger=logger)
        k = len(config.feature_subset)
        train_metrics = evaluate(train.prices, model.predict_matrix(train.features), k)
        predicted = model.predict_matrix(test.features)
        test_metrics = evaluate(test.prices, predicted, k)
    except PateError as e:
        logger.error(f"消融单元 {label} 失败: {e}")
        return ExperimentResult(config, kind, None, None, seed, cell_params, digest, error=str(e))

    logger.info(f"{label}: 训练 R²={train_metrics.r2:.4f}, 测试 R²={test_metrics.r2:.4f}")
    return ExperimentResult(
        config, kind, train_metrics, test_metrics, seed, cell_params, digest,
        model=model, test_actual=test.prices, test_predicted=predicted,
    )


def run_ablation(
        data: Dataset,
        split: Optional[SplitSpec] = None,
        params: Optional[BoostParams] = None,
        jobs: int = 1,
        logger: Optional[logging.Logger] = None,
) -> List[ExperimentResult]:
    """
    跑完 10 个消融单元

    :param data: 已校验的数据集
    :param split: 划分参数，所有单元共用
    :param params: 提升树超参数
    :param jobs: 并行线程数，结果总按规范顺序返回
    :return: 线性 5 个在前、提升树 5 个在后，设置顺序同 ABLATION_CONFIGS
    """
    logger = logger or get_logger()
    split = split or SplitSpec()
    params = params or BoostParams(seed=derive_boost_seed(split.seed))
    if len(data) == 0:
        raise EmptyDataset(data.provenance)

    train_idx, test_idx = split_indices(len(data), split)
    digest = partition_digest(train_idx, test_idx)
    train, test = data.take(train_idx, "train"), data.take(test_idx, "test")
    logger.info(f"划分完成: 训练 {len(train)} 条, 测试 {len(test)} 条, 指纹 {digest[:12]}")

    cells = [(config, kind) for kind in ModelKind for config in ABLATION_CONFIGS]

    def work(cell: Tuple[AblationConfig, ModelKind]) -> ExperimentResult:
        return _run_cell(cell[0], cell[1], train, test, params, split.seed, digest, logger)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(cell) for cell in cells]

    results.sort(key=ExperimentResult.sort_key)
    failed = sum(not r.ok for r in results)
    if failed:
        logger.warning(f"{failed} 个消融单元失败，其余照常输出")
    return results


def table3_rows(results: Sequence[ExperimentResult]) -> List[Dict[str, Any]]:
    """先训练集块、后测试集块，每块按规范顺序"""
    ordered = sorted(results, key=ExperimentResult.sort_key)
    rows = []
    for data_label, field in ((reference.TRAINING, "train_metrics"), (reference.TESTING, "test_metrics")):
        for result in ordered:
            metrics = getattr(result, field)
            values = metrics.as_row() if metrics is not None else {column: NA for column in reference.METRIC_COLUMNS}
            rows.append({"Data": data_label, "Method": result.method, **values})
    return rows


def table2_payload(train_fit: LinearModel, full_fit: Optional[LinearModel] = None) -> Dict[str, Any]:
    """全特征线性模型的系数表，并标出哪次拟合的截距落在参考值 ±1% 内"""
    fits = {"train": train_fit}
    if full_fit is not None:
        fits["full"] = full_fit
    payload: Dict[str, Any] = {
        "reference_intercept": reference.LINEAR_INTERCEPT,
        "tolerance": reference.LINEAR_INTERCEPT_TOLERANCE,
        "fits": {},
    }
    for name, model in fits.items():
        entry = linear_to_dict(model)
        entry["intercept_matches"] = compare_intercept(
            model, reference.LINEAR_INTERCEPT, reference.LINEAR_INTERCEPT_TOLERANCE)
        payload["fits"][name] = entry
    payload["matches"] = [name for name, entry in payload["fits"].items() if entry["intercept_matches"]]
    return payload


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise ReportIoError(str(path), str(e)) from None
    return path


def _write_text(text: str, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise ReportIoError(str(path), str(e)) from None
    return path


def write_correlation(matrix: CorrelationMatrix, path: Union[str, Path]) -> Path:
    rows = matrix.to_csv_rows()
    return _write_frame(pd.DataFrame(rows[1:], columns=rows[0]), Path(path))


def write_importance(ranking: Sequence[Tuple[FeatureId, int]], path: Union[str, Path]) -> Path:
    frame = pd.DataFrame(
        [(rank, feature.name, count) for rank, (feature, count) in enumerate(ranking, start=1)],
        columns=["Rank", "Feature", "FScore"],
    )
    return _write_frame(frame, Path(path))


def _prediction_plots(results: Sequence[ExperimentResult], destination: Path) -> List[Path]:
    written = []
    full = ABLATION_CONFIGS[-1]
    for result in results:
        if result.config != full or not result.ok or result.test_predicted is None:
            continue
        for kind in (plots.PlotKind.SCATTER_ACTUAL_VS_PREDICTED,
                     plots.PlotKind.RESIDUALS_VS_PREDICTED,
                     plots.PlotKind.ERROR_HISTOGRAM):
            spec = plots.PlotSpec(
                kind, f"{result.method} / {reference.TESTING}",
                destination / f"{result.model_kind.value}_{kind.value}.svg")
            written.append(plots.render_predictions(spec, result.test_actual, result.test_predicted))
    return written


def emit_report(
        results: Sequence[ExperimentResult],
        correlation: Optional[CorrelationMatrix],
        importance: Optional[Sequence[Tuple[FeatureId, int]]],
        destination: Union[str, Path],
        table2: Optional[Dict[str, Any]] = None,
        logger: Optional[logging.Logger] = None,
) -> ReportBundle:
    """
    写出报告文件，相同输入得到相同字节

    - table3.csv / reference_check.csv / 全特征设置下两种模型的 3 张预测图
    - correlation.csv + correlation_heatmap.svg (给出 correlation 时)
    - importance.csv + importance_bar.svg (给出 importance 时)
    - table2.json (给出 table2 时)
    """
    logger = logger or get_logger()
    if not results:
        raise NoResults()
    destination = Path(destination)
    written: List[Path] = []

    rows = table3_rows(results)
    written.append(_write_frame(pd.DataFrame(rows, columns=list(TABLE3_COLUMNS)), destination / "table3.csv"))
    checked = reference.compare_table3([r for r in rows if r[reference.METRIC_COLUMNS[0]] != NA])
    written.append(_write_frame(
        pd.DataFrame(checked, columns=["Data", "Method", "Metric", "Published", "Reproduced", "Delta"]),
        destination / "reference_check.csv"))
    written.extend(_prediction_plots(sorted(results, key=ExperimentResult.sort_key), destination))

    if correlation is not None:
        written.append(write_correlation(correlation, destination / "correlation.csv"))
        written.append(plots.render_heatmap(
            plots.PlotSpec(plots.PlotKind.CORRELATION_HEATMAP, "Pearson correlation",
                           destination / "correlation_heatmap.svg"),
            correlation.labels, correlation.values))
    if importance is not None:
        written.append(write_importance(importance, destination / "importance.csv"))
        written.append(plots.render_importance(
            plots.PlotSpec(plots.PlotKind.IMPORTANCE_BAR, "Feature importance (F score)",
                           destination / "importance_bar.svg"),
            [(feature.name, count) for feature, count in importance]))
    if table2 is not None:
        written.append(_write_text(json.dumps(table2, ensure_ascii=False, indent=2) + "\n",
                                   destination / "table2.json"))

    logger.info(f"报告已写出 {len(written)} 个文件到: {destination}")
    return ReportBundle(destination, written)


# ---------------------------------------------------------------- 命令行

def _split_spec(params, config) -> SplitSpec:
    return config.split_spec(params.train_frac, params.seed)


def _boost_params(params, config, split: SplitSpec) -> BoostParams:
    return config.boost_params(
        seed=derive_boost_seed(split.seed),
        n_trees=params.trees,
        max_depth=params.depth,
        learning_rate=params.eta,
        reg_lambda=params.reg_lambda,
        gamma=params.gamma,
    )


def _train_test(data: Dataset, split: SplitSpec) -> Tuple[Dataset, Dataset]:
    train_idx, test_idx = split_indices(len(data), split)
    return data.take(train_idx, "train"), data.take(test_idx, "test")


def cmd_ingest(params, config, logger) -> int:
    data = ingest_csv(params.data, logger=logger)
    print(summarize(data).to_string())
    if params.out:
        write_csv(data, params.out)
        logger.info(f"已写出规范化数据集: {params.out}")
    return 0


def cmd_features(params, config, logger) -> int:
    properties = ingest_property_csv(params.data, logger=logger)
    data = derive_dataset(
        properties,
        read_pois(params.pois),
        read_traffic(params.traffic),
        read_emotions(params.emotions),
        config.geo_settings(params.jobs),
        provenance=str(params.data),
        logger=logger,
    )
    write_csv(data, params.out)
    logger.info(f"已写出完整数据集: {params.out}")
    return 0


def cmd_correlate(params, config, logger) -> int:
    matrix = correlation_matrix(ingest_csv(params.data, logger=logger))
    write_correlation(matrix, params.out)
    for a, b, r in matrix.strongest_pairs(5):
        logger.info(f"强相关: {a} - {b}: {r:.3f}")
    ranked = sorted(((abs(r), name, r) for name, r in matrix.price_row() if r is not None), reverse=True)
    for _, name, r in ranked[:5]:
        logger.info(f"与房价相关: {name}: {r:.3f}")
    return 0


def cmd_train(params, config, logger) -> int:
    data = ingest_csv(params.data, logger=logger)
    split = _split_spec(params, config)
    train, _ = _train_test(data, split)
    subset = ablation_config(params.config).feature_subset
    if params.model == ModelKind.LINEAR.value:
        model = fit_linear(train, subset, logger=logger)
    else:
        model = fit_boosted(train, subset, _boost_params(params, config, split), logger=logger)
    ModelStore(logger=logger).save(model, params.model_file)
    return 0


def cmd_evaluate(params, config, logger) -> int:
    model = ModelStore(logger=logger).load(params.model_file)
    data = ingest_csv(params.data, logger=logger)
    train, test = _train_test(data, _split_spec(params, config))
    k = len(model.feature_subset)
    rows = []
    for label, part in ((reference.TRAINING, train), (reference.TESTING, test)):
        rows.append({"Data": label, **evaluate(part.prices, model.predict_matrix(part.features), k).as_row()})
    frame = pd.DataFrame(rows, columns=["Data"] + list(reference.METRIC_COLUMNS))
    print(frame.to_string(index=False))
    if params.out:
        _write_frame(frame, Path(params.out))
    return 0


def cmd_importance(params, config, logger) -> int:
    if params.model_file:
        model = ModelStore(logger=logger).load(params.model_file)
        if not isinstance(model, BoostedEnsemble):
            raise ModelFormatError(f"{params.model_file} 不是提升树模型，无法计算 F-score")
    else:
        data = ingest_csv(params.data, logger=logger)
        split = _split_spec(params, config)
        train, _ = _train_test(data, split)
        model = fit_boosted(train, FEATURES, _boost_params(params, config, split), logger=logger)
    ranking = feature_importance(model)
    out = Path(params.out)
    write_importance(ranking, out / "importance.csv")
    plots.render_importance(
        plots.PlotSpec(plots.PlotKind.IMPORTANCE_BAR, "Feature importance (F score)", out / "importance_bar.svg"),
        [(feature.name, count) for feature, count in ranking])
    return 0


def _ablate(params, config, logger) -> Tuple[Dataset, List[ExperimentResult]]:
    data = ingest_csv(params.data, logger=logger)
    split = _split_spec(params, config)
    results = run_ablation(data, split, _boost_params(params, config, split), config.jobs(params.jobs), logger)
    return data, results


def cmd_ablate(params, config, logger) -> int:
    _, results = _ablate(params, config, logger)
    emit_report(results, None, None, params.out, logger=logger)
    return 0


def cmd_report(params, config, logger) -> int:
    data, results = _ablate(params, config, logger)
    full = ABLATION_CONFIGS[-1]
    by_cell = {(r.config.name, r.model_kind): r for r in results}
    boosted = by_cell[(full.name, ModelKind.BOOSTED)]
    linear = by_cell[(full.name, ModelKind.LINEAR)]
    importance = feature_importance(boosted.model) if boosted.ok else None
    table2 = table2_payload(linear.model, fit_linear(data, FEATURES, logger=logger)) if linear.ok else None
    emit_report(results, correlation_matrix(data), importance, params.out, table2=table2, logger=logger)
    return 0


def cmd_synth(params, config, logger) -> int:
    from synth import synthetic_dataset, synthetic_sources, write_sources

    seed = config.seed(params.seed)
    out = Path(params.out)
    write_csv(synthetic_dataset(params.rows, seed), out / "dataset.csv")
    paths = write_sources(synthetic_sources(params.homes, seed), out / "raw")
    logger.info(f"已写出合成数据: {out / 'dataset.csv'}, 原始数据 {len(paths)} 个文件")
    return 0


HANDLERS: Dict[str, Callable[..., int]] = {
    "ingest": cmd_ingest,
    "features": cmd_features,
    "correlate": cmd_correlate,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "importance": cmd_importance,
    "ablate": cmd_ablate,
    "report": cmd_report,
    "synth": cmd_synth,
}


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    命令行入口

    :return: 0 成功；1 数据、配置或写文件错误，stderr 输出一行 '错误: ...'；2 用法错误
    """
    from utils import initialize
    from utils.cli.param import parse_cli_args

    try:
        params = parse_cli_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    try:
        config, logger = initialize(params.settings, params.log_level)
        return HANDLERS[params.command](params, config, logger)
    except (PateError, OSError, ValueError) as e:
        get_logger().debug(f"{params.command} 失败", exc_info=True)
        print(f"错误: {e}", file=sys.stderr)
        return 1
