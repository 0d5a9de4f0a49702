import configparser
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import schema as sc
from dotenv import dotenv_values

from errors import ConfigError

SEED_ENV = "PATE_SEED"
DEFAULT_SEED = 42


def _boolean(value: str) -> bool:
    normalized = str(value).strip().lower()
    if normalized in ("1", "true", "yes", "on"):
        return True
    if normalized in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"不是布尔值: {value}")


def _seed(value) -> int:
    seed = int(str(value).strip())
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed 超出 64 位无符号整数范围: {seed}")
    return seed


_non_negative = sc.And(sc.Use(float), lambda v: v >= 0, error="必须是非负数")
_positive_int = sc.And(sc.Use(int), lambda v: v >= 1, error="必须是正整数")

SECTIONS: Dict[str, sc.Schema] = {
    "log": sc.Schema({sc.Optional("LEVEL"): str}),
    "split": sc.Schema({
        sc.Optional("TRAIN_FRACTION"): sc.And(sc.Use(float), lambda v: 0 < v < 1, error="必须在 (0, 1) 内"),
        sc.Optional("SEED"): sc.Use(_seed, error="必须是 64 位无符号整数"),
    }),
    "boost": sc.Schema({
        sc.Optional("TREES"): _positive_int,
        sc.Optional("DEPTH"): _positive_int,
        sc.Optional("ETA"): sc.And(sc.Use(float), lambda v: 0 < v <= 1, error="必须在 (0, 1] 内"),
        sc.Optional("LAMBDA"): _non_negative,
        sc.Optional("GAMMA"): _non_negative,
        sc.Optional("MIN_CHILD_WEIGHT"): _non_negative,
    }),
    "geo": sc.Schema({
        sc.Optional("RADIUS_M"): sc.And(sc.Use(float), lambda v: v > 0, error="必须为正数"),
        sc.Optional("GRID_INDEX"): sc.Use(_boolean, error="必须是布尔值"),
        sc.Optional("TRAFFIC_WINDOW_START"): sc.And(sc.Use(int), lambda v: 0 <= v < 1440, error="须在 [0, 1440) 内"),
        sc.Optional("TRAFFIC_WINDOW_END"): sc.And(sc.Use(int), lambda v: 0 < v <= 1440, error="须在 (0, 1440] 内"),
    }),
    "run": sc.Schema({sc.Optional("JOBS"): _positive_int}),
}

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "log": {"LEVEL": "INFO"},
    "split": {"TRAIN_FRACTION": 0.7, "SEED": DEFAULT_SEED},
    "boost": {"TREES": 100, "DEPTH": 6, "ETA": 0.3, "LAMBDA": 1.0, "GAMMA": 0.0, "MIN_CHILD_WEIGHT": 1.0},
    "geo": {"RADIUS_M": 1000.0, "GRID_INDEX": True, "TRAFFIC_WINDOW_START": 360, "TRAFFIC_WINDOW_END": 1440},
    "run": {"JOBS": 1},
}


class IniConfigHandler:
    """
    读取 config.ini 与 .env，给出带类型的运行配置

    - 配置文件缺失时使用内置默认值
    - 每个取值用 schema 校验并转换，失败抛 ConfigError
    - 随机种子优先级: 命令行 > 环境变量 PATE_SEED (.env 亦可) > [split] SEED > 42
    """

    def __init__(
            self,
            file_path: Optional[Union[str, Path]] = None,
            env_file: Optional[Union[str, Path]] = None,
            logger: Optional[logging.Logger] = None,
    ):
        from utils.logutil.logutil import BuildLogger

        root = BuildLogger.get_root_dir()
        self.file_path = Path(file_path) if file_path else root / "config.ini"
        self.env_file = Path(env_file) if env_file else root / ".env"
        self.logger = logger or logging.getLogger(__name__)
        self.settings = self._load()
        self.env = {k: v for k, v in dotenv_values(self.env_file).items() if v is not None} \
            if self.env_file.exists() else {}

    def _load(self) -> Dict[str, Dict[str, Any]]:
        settings = {section: dict(values) for section, values in DEFAULTS.items()}
        if not self.file_path.exists():
            return settings

        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            parser.read(self.file_path, encoding="utf-8-sig")
        except configparser.Error as e:
            raise ConfigError("*", "*", f"无法解析 {self.file_path}: {e}") from None

        for section in parser.sections():
            key = section.lower()
            if key not in SECTIONS:
                self.logger.debug(f"忽略未知配置节 [{section}]")
                continue
            raw = {name.upper(): value for name, value in parser.items(section)}
            for name, value in raw.items():
                try:
                    checked = SECTIONS[key].validate({name: value})
                except sc.SchemaError as e:
                    raise ConfigError(section, name, str(e.autos[-1] if e.autos else e)) from None
                settings[key].update(checked)
        return settings

    def get(self, section: str, key: str) -> Any:
        return self.settings[section][key]

    def log_level(self) -> str:
        return str(self.get("log", "LEVEL"))

    def seed(self, override: Optional[int] = None) -> int:
        if override is not None:
            return _seed(override)
        raw = os.environ.get(SEED_ENV, self.env.get(SEED_ENV))
        if raw is not None and str(raw).strip():
            try:
                return _seed(raw)
            except ValueError:
                raise ConfigError("env", SEED_ENV, f"不是合法的种子: {raw!r}") from None
        return int(self.get("split", "SEED"))

    def split_spec(self, train_fraction: Optional[float] = None, seed: Optional[int] = None):
        from dataset import SplitSpec

        return SplitSpec(
            train_fraction=self.get("split", "TRAIN_FRACTION") if train_fraction is None else train_fraction,
            seed=self.seed(seed),
        )

    def boost_params(self, seed: int = 0, **overrides):
        """overrides 中值为 None 的键沿用配置文件"""
        from gbt import BoostParams

        mapping = {
            "n_trees": "TREES", "max_depth": "DEPTH", "learning_rate": "ETA",
            "reg_lambda": "LAMBDA", "gamma": "GAMMA", "min_child_weight": "MIN_CHILD_WEIGHT",
        }
        values = {
            name: overrides[name] if overrides.get(name) is not None else self.get("boost", key)
            for name, key in mapping.items()
        }
        return BoostParams(seed=seed, **values)

    def geo_settings(self, jobs: Optional[int] = None):
        from geofeatures import GeoSettings, TrafficWindow

        return GeoSettings(
            radius_m=self.get("geo", "RADIUS_M"),
            grid_index=self.get("geo", "GRID_INDEX"),
            window=TrafficWindow(self.get("geo", "TRAFFIC_WINDOW_START"), self.get("geo", "TRAFFIC_WINDOW_END")),
            jobs=self.jobs(jobs),
        )

    def jobs(self, override: Optional[int] = None) -> int:
        return int(override) if override else int(self.get("run", "JOBS"))
