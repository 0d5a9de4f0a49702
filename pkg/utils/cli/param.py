import argparse
from dataclasses import dataclass, fields
from typing import Optional, Sequence

COMMANDS = ("ingest", "features", "correlate", "train", "evaluate", "importance", "ablate", "report", "synth")


@dataclass
class CLIParams:
    command: str
    data: Optional[str] = None
    pois: Optional[str] = None
    traffic: Optional[str] = None
    emotions: Optional[str] = None
    seed: Optional[int] = None
    train_frac: Optional[float] = None
    trees: Optional[int] = None
    depth: Optional[int] = None
    eta: Optional[float] = None
    reg_lambda: Optional[float] = None
    gamma: Optional[float] = None
    out: Optional[str] = None
    config: Optional[str] = None
    model: str = "boosted"
    model_file: Optional[str] = None
    settings: Optional[str] = None
    jobs: Optional[int] = None
    rows: int = 5000
    homes: int = 60
    log_level: Optional[str] = None


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"不是整数: {text}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"种子须在 [0, 2^64) 内: {text}")
    return value


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"不是数字: {text}")
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"比例须在 (0, 1) 内: {text}")
    return value


def _eta(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"不是数字: {text}")
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"学习率须在 (0, 1] 内: {text}")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"不是整数: {text}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"须为正整数: {text}")
    return value


def _non_negative(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"不是数字: {text}")
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"不能为负: {text}")
    return value


def _config_name(text: str) -> str:
    # 延迟导入，避免循环依赖
    from experiment import ablation_config

    try:
        return ablation_config(text).name
    except KeyError:
        raise argparse.ArgumentTypeError(f"未知的消融设置: {text}")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--settings', metavar='PATH', help='配置文件路径，默认项目根目录的 config.ini')
    parser.add_argument('--log-level', dest='log_level',
                        help="日志等级 (DEBUG, INFO, WARNING, ERROR, CRITICAL) 或数字等级")


def _split(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--seed', type=_seed, help='随机种子，缺省时取环境变量 PATE_SEED')
    parser.add_argument('--train-frac', dest='train_frac', type=_fraction, help='训练集比例')


def _boost(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--trees', type=_positive, help='树的棵数')
    parser.add_argument('--depth', type=_positive, help='最大深度')
    parser.add_argument('--eta', type=_eta, help='学习率')
    parser.add_argument('--lambda', dest='reg_lambda', type=_non_negative, help='叶子权重 L2 正则')
    parser.add_argument('--gamma', type=_non_negative, help='每个叶子的复杂度惩罚')


def _data(parser: argparse.ArgumentParser, help_text: str = '完整 27 列数据集 CSV') -> None:
    parser.add_argument('--data', required=True, metavar='PATH', help=help_text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='pate', description='房价特征消融实验命令行')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('ingest', help='读取并校验数据集')
    _data(p)
    p.add_argument('--out', metavar='PATH', help='规范化后的数据集写到此文件')
    _common(p)

    p = sub.add_parser('features', help='由房产表和原始数据派生 26 个特征')
    _data(p, '房产基础表 CSV (Year..Lng, Price)')
    p.add_argument('--pois', required=True, metavar='PATH')
    p.add_argument('--traffic', required=True, metavar='PATH')
    p.add_argument('--emotions', required=True, metavar='PATH')
    p.add_argument('--out', required=True, metavar='PATH', help='输出数据集 CSV')
    p.add_argument('--jobs', type=_positive)
    _common(p)

    p = sub.add_parser('correlate', help='27 × 27 相关系数矩阵')
    _data(p)
    p.add_argument('--out', required=True, metavar='PATH', help='输出 CSV')
    _common(p)

    p = sub.add_parser('train', help='在训练集上拟合一个模型')
    _data(p)
    p.add_argument('--model', choices=('linear', 'boosted'), default='boosted')
    p.add_argument('--config', type=_config_name, default='w/ PATS', metavar='NAME', help='消融设置')
    p.add_argument('--model-file', dest='model_file', required=True, metavar='PATH', help='模型 JSON 输出路径')
    _split(p)
    _boost(p)
    _common(p)

    p = sub.add_parser('evaluate', help='用已保存的模型评估训练集和测试集')
    _data(p)
    p.add_argument('--model-file', dest='model_file', required=True, metavar='PATH')
    p.add_argument('--out', metavar='PATH', help='指标 CSV 输出路径')
    _split(p)
    _common(p)

    p = sub.add_parser('importance', help='提升树的 F-score 特征排序')
    _data(p)
    p.add_argument('--model-file', dest='model_file', metavar='PATH', help='已保存的提升树模型，不给则重新训练')
    p.add_argument('--out', required=True, metavar='DIR')
    _split(p)
    _boost(p)
    _common(p)

    for name, text in (('ablate', '10 个消融单元 (5 设置 × 2 模型)'), ('report', '消融 + 相关分析 + 特征重要性的完整报告')):
        p = sub.add_parser(name, help=text)
        _data(p)
        p.add_argument('--out', required=True, metavar='DIR')
        p.add_argument('--jobs', type=_positive)
        _split(p)
        _boost(p)
        _common(p)

    p = sub.add_parser('synth', help='生成合成数据集与原始数据')
    p.add_argument('--out', required=True, metavar='DIR')
    p.add_argument('--rows', type=_positive, default=5000)
    p.add_argument('--homes', type=_positive, default=60)
    p.add_argument('--seed', type=_seed)
    _common(p)

    return parser


def parse_cli_args(argv: Optional[Sequence[str]] = None) -> CLIParams:
    """解析失败时 argparse 打印用法并以退出码 2 结束"""
    args = build_parser().parse_args(argv)
    known = {f.name for f in fields(CLIParams)}
    return CLIParams(**{k: v for k, v in vars(args).items() if k in known and v is not None})
