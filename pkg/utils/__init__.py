import logging
from typing import Optional, Tuple, Union

__auth__ = 'FUHAO'

# 延迟导入，避免循环依赖
logger = None
configparser = None


def initialize(settings: Optional[str] = None, log_level: Optional[Union[int, str]] = None) -> Tuple[object, logging.Logger]:
    """
    按需初始化配置与默认 logger

    :param settings: config.ini 路径，None 表示项目根目录下的 config.ini
    :param log_level: 命令行给出的日志等级，优先于配置文件
    """
    global logger, configparser

    from utils.configutil.configutil import IniConfigHandler
    from utils.logutil import configure_logging

    configparser = IniConfigHandler(settings)
    logger = configure_logging(log_level if log_level is not None else configparser.log_level())
    configparser.logger = logger
    return configparser, logger


__all__ = ['logger', 'configparser', 'initialize']
