"""
从零实现的梯度提升回归树

损失取平方误差 ½(y - ŷ)²，故 g = ŷ - y，h = 1；
正则项 Ω(f) = γ·叶子数 + ½λ‖w‖²；节点内对 (特征, 中点阈值) 做精确贪心枚举。
"""
import logging
import math
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
from frozendict import frozendict

from dataset import Dataset, MAX_SEED
from errors import DegenerateLeaf, EmptyDataset
from linreg import Row, row_value
from Property import FEATURES, FeatureId, resolve_feature
from utils.logutil import get_logger


def _positive_int(instance, attribute, value):
    if value < 1:
        raise ValueError(f"{attribute.name} 必须为正整数，实际 {value}")


def _non_negative(instance, attribute, value):
    if value < 0:
        raise ValueError(f"{attribute.name} 不能为负，实际 {value}")


def _unit_interval(instance, attribute, value):
    if not 0.0 < value <= 1.0:
        raise ValueError(f"learning_rate 必须在 (0, 1] 内，实际 {value}")


def _seed(instance, attribute, value):
    if not 0 <= value <= MAX_SEED:
        raise ValueError(f"seed 必须是 64 位无符号整数，实际 {value}")


@attr.s(frozen=True, slots=True)
class BoostParams:
    n_trees: int = attr.ib(default=100, converter=int, validator=_positive_int)
    max_depth: int = attr.ib(default=6, converter=int, validator=_positive_int)
    learning_rate: float = attr.ib(default=0.3, converter=float, validator=_unit_interval)
    reg_lambda: float = attr.ib(default=1.0, converter=float, validator=_non_negative)
    gamma: float = attr.ib(default=0.0, converter=float, validator=_non_negative)
    min_child_weight: float = attr.ib(default=1.0, converter=float, validator=_non_negative)
    seed: int = attr.ib(default=0, converter=int, validator=_seed)

    def to_dict(self) -> Dict[str, Union[int, float]]:
        return attr.asdict(self)


@attr.s(frozen=True, slots=True)
class Leaf:
    weight: float = attr.ib(converter=float)


@attr.s(frozen=True, slots=True)
class Split:
    """feature 取值 < threshold 走左子树，>= threshold 走右子树"""
    feature: FeatureId = attr.ib(converter=resolve_feature)
    threshold: float = attr.ib(converter=float)
    left: "Node" = attr.ib()
    right: "Node" = attr.ib()


Node = Union[Leaf, Split]


@attr.s(frozen=True, slots=True)
class RegressionTree:
    root: Node = attr.ib()

    def depth(self) -> int:
        def walk(node: Node) -> int:
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)

    def splits(self) -> List[Split]:
        found: List[Split] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Split):
                found.append(node)
                stack.extend((node.right, node.left))
        return found

    def leaves(self) -> List[Leaf]:
        found: List[Leaf] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, Leaf):
                found.append(node)
            else:
                stack.extend((node.right, node.left))
        return found

    def predict_row(self, row: Row) -> float:
        node = self.root
        while isinstance(node, Split):
            node = node.left if row_value(row, node.feature) < node.threshold else node.right
        return node.weight

    def predict_matrix(self, features: np.ndarray) -> np.ndarray:
        """features 为 n × 26 的完整特征矩阵"""
        out = np.empty(features.shape[0], dtype=np.float64)

        def walk(node: Node, rows: np.ndarray) -> None:
            if rows.size == 0:
                return
            if isinstance(node, Leaf):
                out[rows] = node.weight
                return
            goes_left = features[rows, node.feature.index] < node.threshold
            walk(node.left, rows[goes_left])
            walk(node.right, rows[~goes_left])

        walk(self.root, np.arange(features.shape[0]))
        return out


@attr.s(frozen=True, slots=True, eq=False)
class BoostedEnsemble:
    """
    参数:
        base_score: 初始预测 (训练目标均值)
        trees: 按训练顺序排列的回归树
        params: 训练超参数
        fscore: 特征 -> 被选作分裂的次数
        feature_subset: 训练时可用的特征
        objective_trace: 每轮后的正则化目标值，首项为只有 base_score 时的取值
    """
    base_score: float = attr.ib(converter=float)
    trees: Tuple[RegressionTree, ...] = attr.ib(converter=tuple)
    params: BoostParams = attr.ib(factory=BoostParams)
    fscore: frozendict = attr.ib(factory=frozendict, converter=frozendict)
    feature_subset: Tuple[FeatureId, ...] = attr.ib(default=FEATURES, converter=tuple)
    objective_trace: Tuple[float, ...] = attr.ib(default=(), converter=tuple)

    def internal_node_count(self) -> int:
        return sum(len(tree.splits()) for tree in self.trees)

    def referenced_features(self) -> List[FeatureId]:
        seen = {split.feature for tree in self.trees for split in tree.splits()}
        return sorted(seen, key=lambda f: f.index)

    def predict_matrix(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        total = np.zeros(features.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree.predict_matrix(features)
        return self.base_score + self.params.learning_rate * total


def leaf_weight(G: float, H: float, reg_lambda: float) -> float:
    """正则化二阶目标下的最优叶子值 -G / (H + λ)"""
    denominator = H + reg_lambda
    if denominator <= 0:
        raise DegenerateLeaf(H, reg_lambda)
    return -G / denominator + 0.0


def split_gain(GL: float, HL: float, GR: float, HR: float, reg_lambda: float, gamma: float) -> float:
    """
    分裂带来的目标下降量
    ½[GL²/(HL+λ) + GR²/(HR+λ) - (GL+GR)²/(HL+HR+λ)] - γ
    """
    if HL + reg_lambda <= 0:
        raise DegenerateLeaf(HL, reg_lambda)
    if HR + reg_lambda <= 0:
        raise DegenerateLeaf(HR, reg_lambda)
    G, H = GL + GR, HL + HR
    return 0.5 * (GL * GL / (HL + reg_lambda) + GR * GR / (HR + reg_lambda) - G * G / (H + reg_lambda)) - gamma


@attr.s(frozen=True, slots=True)
class SplitCandidate:
    gain: float = attr.ib()
    column: int = attr.ib()
    threshold: float = attr.ib()


def midpoint(lower: float, upper: float) -> float:
    """相邻两个不同取值的中点，保证 lower < t <= upper"""
    t = lower + (upper - lower) / 2.0
    return t if lower < t <= upper else upper


class TreeBuilder:
    """
    单棵树的精确贪心构建

    每个特征预先排好序，节点分裂时按左右归属稳定地切分有序下标，
    每层的总开销与样本数成正比。
    """

    def __init__(
            self,
            columns: np.ndarray,
            order: List[np.ndarray],
            params: BoostParams,
            subset: Sequence[FeatureId],
    ):
        self.columns = columns
        self.order = order
        self.params = params
        self.subset = tuple(subset)
        self.split_counts: Counter = Counter()
        self.g: np.ndarray = np.empty(0)
        self.h: np.ndarray = np.empty(0)

    def build(self, g: np.ndarray, h: np.ndarray) -> RegressionTree:
        self.g, self.h = g, h
        return RegressionTree(self._grow(list(self.order), depth=0))

    def _best_for_column(self, column: int, rows: np.ndarray, G: float, H: float) -> Optional[SplitCandidate]:
        if rows.size < 2:
            return None
        x = self.columns[rows, column]
        GL = np.cumsum(self.g[rows])[:-1]
        HL = np.cumsum(self.h[rows])[:-1]
        GR = G - GL
        HR = H - HL
        lam = self.params.reg_lambda
        valid = (x[:-1] < x[1:]) & (HL >= self.params.min_child_weight) & (HR >= self.params.min_child_weight)
        valid &= (HL + lam > 0) & (HR + lam > 0)
        if not valid.any():
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam)) - self.params.gamma
        gain = np.where(valid, gain, -np.inf)
        # argmax 返回第一个最大值，即阈值最小者
        position = int(np.argmax(gain))
        return SplitCandidate(float(gain[position]), column, midpoint(x[position], x[position + 1]))

    def _grow(self, sorted_rows: List[np.ndarray], depth: int) -> Node:
        rows = sorted_rows[0]
        G = math.fsum(self.g[rows].tolist())
        H = math.fsum(self.h[rows].tolist())
        if depth >= self.params.max_depth:
            return Leaf(leaf_weight(G, H, self.params.reg_lambda))

        best: Optional[SplitCandidate] = None
        for column, rows_by_column in enumerate(sorted_rows):
            candidate = self._best_for_column(column, rows_by_column, G, H)
            # 严格大于：增益相同时保留特征序号更小者
            if candidate is not None and (best is None or candidate.gain > best.gain):
                best = candidate
        if best is None or not best.gain > 0:
            return Leaf(leaf_weight(G, H, self.params.reg_lambda))

        goes_left = np.zeros(self.columns.shape[0], dtype=bool)
        goes_left[rows] = self.columns[rows, best.column] < best.threshold
        left = [r[goes_left[r]] for r in sorted_rows]
        right = [r[~goes_left[r]] for r in sorted_rows]
        self.split_counts[self.subset[best.column]] += 1
        return Split(
            feature=self.subset[best.column],
            threshold=best.threshold,
            left=self._grow(left, depth + 1),
            right=self._grow(right, depth + 1),
        )


def regularization(tree: RegressionTree, params: BoostParams) -> float:
    """γ·叶子数 + ½λ‖η·w‖²，叶子值按收缩后的贡献计"""
    leaves = tree.leaves()
    shrunk = [params.learning_rate * leaf.weight for leaf in leaves]
    return params.gamma * len(leaves) + 0.5 * params.reg_lambda * math.fsum(w * w for w in shrunk)


def fit_boosted(
        train: Dataset,
        subset: Optional[Sequence[Union[int, str, FeatureId]]] = None,
        params: Optional[BoostParams] = None,
        logger: Optional[logging.Logger] = None,
) -> BoostedEnsemble:
    """
    逐棵拟合回归树

    :param train: 非空训练集
    :param subset: 可用特征，默认全部；内部按特征序号升序处理以固定平局规则
    :param params: 超参数
    :return: BoostedEnsemble
    """
    logger = logger or get_logger()
    params = params or BoostParams()
    if len(train) == 0:
        raise EmptyDataset(train.provenance)
    subset = tuple(sorted({resolve_feature(f) for f in (subset if subset is not None else FEATURES)},
                          key=lambda f: f.index))
    if not subset:
        raise ValueError("特征子集不能为空")

    columns = np.ascontiguousarray(train.columns(subset))
    y = train.prices
    n = len(train)
    order = [np.argsort(columns[:, c], kind="stable") for c in range(columns.shape[1])]
    builder = TreeBuilder(columns, order, params, subset)

    base_score = math.fsum(y.tolist()) / n
    contribution = np.zeros(n, dtype=np.float64)
    prediction = np.full(n, base_score)
    hessian = np.ones(n, dtype=np.float64)
    penalty = 0.0
    trace = [0.5 * math.fsum(((y - prediction) ** 2).tolist())]
    trees: List[RegressionTree] = []
    embedded = _embed(columns, subset)

    for round_index in range(params.n_trees):
        gradient = prediction - y
        tree = builder.build(gradient, hessian)
        trees.append(tree)
        contribution += tree.predict_matrix(embedded)
        prediction = base_score + params.learning_rate * contribution
        penalty += regularization(tree, params)
        trace.append(0.5 * math.fsum(((y - prediction) ** 2).tolist()) + penalty)
        logger.debug(f"第 {round_index + 1} 棵树: 分裂 {len(tree.splits())} 次, 目标 {trace[-1]:.6e}")

    fscore = frozendict({f: builder.split_counts[f] for f in subset if builder.split_counts[f] > 0})
    model = BoostedEnsemble(
        base_score=base_score,
        trees=trees,
        params=params,
        fscore=fscore,
        feature_subset=subset,
        objective_trace=trace,
    )
    logger.debug(f"提升树训练完成: {len(trees)} 棵, 内部节点 {model.internal_node_count()} 个")
    return model


def _embed(columns: np.ndarray, subset: Sequence[FeatureId]) -> np.ndarray:
    """把子集列放回 26 列矩阵的对应位置，供按 FeatureId 路由的预测使用"""
    full = np.zeros((columns.shape[0], len(FEATURES)), dtype=np.float64)
    full[:, [f.index for f in subset]] = columns
    return full


def predict_boosted(model: BoostedEnsemble, features: Row) -> float:
    """base_score + η Σ f_t(row)"""
    for feature in model.referenced_features():
        row_value(features, feature)
    total = math.fsum(tree.predict_row(features) for tree in model.trees)
    return model.base_score + model.params.learning_rate * total


def feature_importance(model: BoostedEnsemble) -> List[Tuple[FeatureId, int]]:
    """按分裂次数降序排列，次数相同按特征序号升序"""
    ranked = [(feature, int(count)) for feature, count in model.fscore.items() if count > 0]
    ranked.sort(key=lambda item: (-item[1], item[0].index))
    return ranked
