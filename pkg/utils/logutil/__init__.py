import logging
from typing import Optional, Union

from .logutil import BuildLogger, normalize_level

__all__ = ['BuildLogger', 'get_logger', 'configure_logging', 'normalize_level']


def get_logger() -> logging.Logger:
    return BuildLogger.get_default_logger(use_console=True)


def configure_logging(log_level: Optional[Union[int, str]] = None) -> logging.Logger:
    """按命令行或配置文件给出的等级调整默认 logger"""
    builder = BuildLogger.get_default(use_console=True)
    if log_level is not None:
        builder.set_level(log_level)
    return builder.get_logger()
