import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from errors import ModelFormatError, ReportIoError
from gbt import BoostedEnsemble, BoostParams, Leaf, Node, RegressionTree, Split
from linreg import LinearModel
from Property import resolve_feature
from utils.logutil import get_logger

Model = Union[LinearModel, BoostedEnsemble]


def linear_to_dict(model: LinearModel) -> Dict[str, Any]:
    return {
        "kind": "linear",
        "intercept": model.intercept,
        "coefficients": [
            {"feature": feature.name, "value": value}
            for feature, value in zip(model.feature_subset, model.coefficients)
        ],
        "regularized": model.regularized,
    }


def node_to_dict(node: Node) -> Dict[str, Any]:
    if isinstance(node, Leaf):
        return {"weight": node.weight}
    return {
        "feature": node.feature.name,
        "threshold": node.threshold,
        "left": node_to_dict(node.left),
        "right": node_to_dict(node.right),
    }


def boosted_to_dict(model: BoostedEnsemble) -> Dict[str, Any]:
    return {
        "kind": "boosted",
        "base_score": model.base_score,
        "params": model.params.to_dict(),
        "feature_subset": [f.name for f in model.feature_subset],
        "fscore": {f.name: count for f, count in sorted(model.fscore.items(), key=lambda kv: kv[0].index)},
        "trees": [node_to_dict(tree.root) for tree in model.trees],
    }


def model_to_dict(model: Model) -> Dict[str, Any]:
    if isinstance(model, LinearModel):
        return linear_to_dict(model)
    if isinstance(model, BoostedEnsemble):
        return boosted_to_dict(model)
    raise TypeError(f"不支持的模型类型: {type(model).__name__}")


def node_from_dict(data: Dict[str, Any]) -> Node:
    if "weight" in data:
        return Leaf(data["weight"])
    return Split(
        feature=data["feature"],
        threshold=data["threshold"],
        left=node_from_dict(data["left"]),
        right=node_from_dict(data["right"]),
    )


def model_from_dict(data: Dict[str, Any]) -> Model:
    kind = data.get("kind")
    try:
        if kind == "linear":
            return LinearModel(
                coefficients=[item["value"] for item in data["coefficients"]],
                intercept=data["intercept"],
                feature_subset=[item["feature"] for item in data["coefficients"]],
                regularized=bool(data.get("regularized", False)),
            )
        if kind == "boosted":
            return BoostedEnsemble(
                base_score=data["base_score"],
                trees=[RegressionTree(node_from_dict(tree)) for tree in data["trees"]],
                params=BoostParams(**data["params"]),
                fscore={resolve_feature(name): int(count) for name, count in data.get("fscore", {}).items()},
                feature_subset=[resolve_feature(name) for name in data["feature_subset"]],
            )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"模型文件字段缺失或非法: {e}") from None
    raise ModelFormatError(f"未知的模型类型: {kind!r}")


def dumps(model: Model) -> str:
    """完整双精度的 JSON 文本，相同模型得到相同字节"""
    return json.dumps(model_to_dict(model), ensure_ascii=False, indent=2) + "\n"


class ModelStore:
    """
    模型的 JSON 持久化

    参数:
        directory: 裸文件名的保存和读取目录，不给则使用项目根目录下的 models/
    """

    def __init__(self, directory: Optional[Union[str, Path]] = None, logger: Optional[logging.Logger] = None):
        from utils.logutil.logutil import BuildLogger

        self.logger = logger or get_logger()
        self.directory = Path(directory) if directory else BuildLogger.get_root_dir() / "models"

    def resolve(self, file_name: Union[str, Path]) -> Path:
        path = Path(file_name)
        if path.parent != Path("."):
            return path
        return self.directory / path

    def save(self, model: Model, file_name: Union[str, Path]) -> Path:
        path = self.resolve(file_name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                f.write(dumps(model))
        except OSError as e:
            raise ReportIoError(str(path), str(e)) from None
        self.logger.info(f"已保存模型到: {path}")
        return path

    def load(self, source: Union[str, Path, Dict[str, Any]]) -> Model:
        """
        加载模型

        参数:
            source: 文件路径 (与 save 相同的解析规则)、以 '{' 开头的 JSON 字符串或已解析的字典
        """
        if isinstance(source, dict):
            return model_from_dict(source)

        if isinstance(source, str) and source.lstrip().startswith("{"):
            text = source
        else:
            path = self.resolve(source)
            if not path.is_file():
                raise ModelFormatError(f"模型文件不存在: {path}")
            self.logger.info(f"加载模型文件: {path}")
            try:
                with open(path, "r", encoding="utf-8") as f:
                    text = f.read()
            except OSError as e:
                raise ModelFormatError(f"无法读取模型文件 {path}: {e}") from None

        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            raise ModelFormatError("无效的 JSON 数据") from None
        if not isinstance(data, dict):
            raise ModelFormatError("模型 JSON 顶层必须是对象")
        return model_from_dict(data)
