import logging
from logging.handlers import RotatingFileHandler

import pytest

from utils.logutil import BuildLogger, normalize_level


@pytest.mark.parametrize("given, expected", [
    ("INFO", logging.INFO),
    ("debug", logging.DEBUG),
    (" warning ", logging.WARNING),
    ("30", 30),
    (40, 40),
    (None, logging.DEBUG),
    ("LOUD", logging.DEBUG),
])
def test_normalize_level(given, expected):
    assert normalize_level(given) == expected


def test_builder_writes_one_rotating_file(tmp_path):
    builder = BuildLogger(logdir=tmp_path, log_name="pate_test_builder.log", log_level="INFO")
    logger = builder.get_logger()
    assert [type(h) for h in logger.handlers] == [RotatingFileHandler]

    logger.info("写入一行")
    logger.debug("不应写入")
    builder.set_level("DEBUG")
    logger.debug("调整等级后写入")
    for handler in logger.handlers:
        handler.flush()

    text = (tmp_path / "pate_test_builder.log").read_text(encoding="utf-8")
    assert "| INFO | test_logutil.py:" in text
    assert "写入一行" in text and "调整等级后写入" in text
    assert "不应写入" not in text

    again = BuildLogger(logdir=tmp_path, log_name="pate_test_builder.log", log_level="INFO")
    assert len(again.get_logger().handlers) == 1
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)
