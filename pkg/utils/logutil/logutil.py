import os
import sys
import logging
import threading
from datetime import datetime
from logging.handlers import RotatingFileHandler
from typing import Dict, Optional, Union
from pathlib import Path


LOG_FORMAT = '%(asctime)s | %(levelname)s | %(filename)s:%(lineno)d | %(message)s'
DATE_FORMAT = '%Y-%m-%d  %H:%M:%S'


def normalize_level(log_level: Optional[Union[int, str]], default: int = logging.DEBUG) -> int:
    """
    将字符串或数字形式的日志等级统一为 logging 的整数等级

    参数:
        log_level: 'INFO' / 'debug' / 20 等
        default: 无法识别时使用的等级
    返回:
        整数日志等级
    """
    if log_level is None:
        return default
    if isinstance(log_level, int):
        return log_level
    normalized = str(log_level).strip().upper()
    if normalized.isdigit():
        return int(normalized)
    name_to_level = getattr(logging, normalized, None)
    return name_to_level if isinstance(name_to_level, int) else default


class BuildLogger:
    _instance: Dict[str, "BuildLogger"] = {}
    _lock = threading.Lock()

    def __init__(
            self,
            logdir: Optional[Union[str, Path]] = None,
            log_name: Optional[str] = None,
            log_level: Optional[Union[int, str]] = logging.DEBUG,
            max_bytes: int = 10 * 1024 * 1024,
            backup_count: int = 3,
            encoding: str = "utf-8",
            use_console: bool = False,
    ):
        self.logdir = Path(logdir) if logdir else self.get_root_dir() / 'logs'
        self.log_name = log_name or 'pate_' + datetime.today().strftime('%Y%m%d') + '.log'
        self.log_level = normalize_level(log_level)
        self.max_bytes = max_bytes
        self.backup_count = backup_count
        self.encoding = encoding
        self.logger: Optional[logging.Logger] = None

        self._ensure_log_directory()
        self._init_logger(use_console=use_console)

    def _init_logger(self, use_console: bool = False):
        try:
            formatter = logging.Formatter(LOG_FORMAT, DATE_FORMAT)

            self.logger = logging.getLogger(self.log_name)
            self.logger.setLevel(self.log_level)
            self.logger.propagate = False

            # 同名 logger 只挂一次处理器
            if not self.logger.handlers:
                rotating_handler = RotatingFileHandler(
                    filename=os.path.join(self.logdir, self.log_name),
                    maxBytes=self.max_bytes,
                    encoding=self.encoding,
                    backupCount=self.backup_count
                )
                rotating_handler.setFormatter(formatter)
                rotating_handler.setLevel(self.log_level)
                self.logger.addHandler(rotating_handler)

                if use_console:
                    # 控制台走 stderr，stdout 留给子命令的输出
                    console_handler = logging.StreamHandler(sys.stderr)
                    console_handler.setFormatter(formatter)
                    console_handler.setLevel(self.log_level)
                    self.logger.addHandler(console_handler)
        except Exception as e:
            logging.basicConfig(level=self.log_level)
            self.logger = logging.getLogger(__name__)
            self.logger.error(f"日志初始化失败，使用基本配置: {e}")

    @staticmethod
    def get_root_dir() -> Path:
        """向上查找包含 README.md 或 requirements.txt 的项目根目录"""
        target_names = [
            'README.md',
            'requirements.txt',
        ]

        here = Path(__file__).resolve().parent
        search_paths = [Path.cwd(), *here.parents]

        seen = set()
        for search_path in search_paths:
            try:
                resolved_path = search_path.resolve()
            except OSError:
                continue
            if resolved_path in seen or not resolved_path.exists():
                continue
            seen.add(resolved_path)
            for file_name in target_names:
                if (resolved_path / file_name).exists():
                    return resolved_path

        return Path.cwd()

    def _ensure_log_directory(self):
        os.makedirs(self.logdir, exist_ok=True)

    def set_level(self, log_level: Optional[Union[int, str]]) -> None:
        """运行期调整 logger 及其全部处理器的等级"""
        self.log_level = normalize_level(log_level)
        self.logger.setLevel(self.log_level)
        for handler in self.logger.handlers:
            handler.setLevel(self.log_level)

    def get_logger(self) -> logging.Logger:
        return self.logger

    @classmethod
    def get_default(cls, **kwargs) -> "BuildLogger":
        instance_key = str(sorted(kwargs.items()))

        with cls._lock:
            if instance_key not in cls._instance:
                cls._instance[instance_key] = cls(**kwargs)

            return cls._instance[instance_key]

    @classmethod
    def get_default_logger(cls, **kwargs) -> logging.Logger:
        return cls.get_default(**kwargs).logger
