from typing import Optional


class PateError(Exception):
    """所有领域错误的基类，CLI 捕获后以退出码 1 结束"""
    pass


class ConfigError(PateError):
    def __init__(self, section: str, key: str, reason: str):
        self.section = section
        self.key = key
        super().__init__(f"配置项 [{section}] {key} 无效: {reason}")


class MissingColumn(PateError):
    def __init__(self, expected: list, found: list):
        self.expected = list(expected)
        self.found = list(found)
        missing = [name for name in self.expected if name not in self.found]
        extra = [name for name in self.found if name not in self.expected]
        detail = []
        if missing:
            detail.append(f"缺少列 {missing}")
        if extra:
            detail.append(f"多余列 {extra}")
        if not detail:
            detail.append("列顺序与约定不一致")
        super().__init__(f"表头不匹配: {'; '.join(detail)}")


class ParseError(PateError):
    def __init__(self, row: int, column: str, cell: str, source: Optional[str] = None):
        self.row = row
        self.column = column
        self.cell = cell
        self.source = source
        where = f"{source} " if source else ""
        super().__init__(f"{where}第 {row} 行 {column} 列无法解析为数值: {cell!r}")


class EmptyDataset(PateError):
    def __init__(self, source: Optional[str] = None):
        self.source = source
        super().__init__(f"数据集为空: {source or '<memory>'}")


class InvariantViolation(PateError):
    def __init__(self, row: int, field: str, reason: str):
        self.row = row
        self.field = field
        self.reason = reason
        super().__init__(f"第 {row} 行字段 {field} 不满足约束: {reason}")


class NoSamples(PateError):
    def __init__(self, detail: str = ""):
        super().__init__(f"时间窗口内没有交通速度样本{': ' + detail if detail else ''}")


class LengthMismatch(PateError):
    def __init__(self, left: int, right: int):
        self.left = left
        self.right = right
        super().__init__(f"两个序列长度不一致: {left} != {right}")


class DegenerateColumn(PateError):
    def __init__(self, column: str = ""):
        self.column = column
        super().__init__(f"列方差为零，相关系数无定义: {column or '<unnamed>'}")


class SingularDesign(PateError):
    def __init__(self, condition: float, rank: int, width: int):
        self.condition = condition
        self.rank = rank
        self.width = width
        super().__init__(f"设计矩阵秩亏 (rank={rank}/{width})，条件数估计 {condition:.3e}")


class MissingFeature(PateError):
    def __init__(self, feature: str):
        self.feature = feature
        super().__init__(f"输入行缺少模型所需特征: {feature}")


class DegenerateLeaf(PateError):
    def __init__(self, hessian: float, reg_lambda: float):
        self.hessian = hessian
        self.reg_lambda = reg_lambda
        super().__init__(f"叶子节点 H + lambda <= 0 (H={hessian}, lambda={reg_lambda})")


class DegenerateTarget(PateError):
    def __init__(self):
        super().__init__("真实值方差为零，R² 无定义")


class InsufficientSamples(PateError):
    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k
        super().__init__(f"样本数 n={n} 不大于 k+1={k + 1}，调整 R² 无定义")


class ReportIoError(PateError):
    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"写入报告失败 {path}: {reason}")


class ModelFormatError(PateError):
    pass


class NoResults(PateError):
    def __init__(self):
        super().__init__("没有可输出的实验结果")
