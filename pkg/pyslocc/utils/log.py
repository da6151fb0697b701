import logging
import sys
from typing import Optional

from .. import config as cfg


class ColorFormatter(logging.Formatter):
    """レベルごとに行全体へ色を付ける"""
    COLORS = {
        logging.DEBUG: "\x1b[38;20m",
        logging.INFO: "\x1b[34m",
        logging.WARNING: "\x1b[33;20m",
        logging.ERROR: "\x1b[31;20m",
        logging.CRITICAL: "\x1b[31;1m",
    }
    RESET = "\x1b[0m"
    FMT = "%(levelname)-9s  %(asctime)s [%(name)24s:%(lineno)4d] %(message)s"

    def __init__(self, use_color: bool = True):
        super().__init__(self.FMT)
        self.use_color = use_color

    def format(self, record):
        text = super().format(record)
        if self.use_color and record.levelno in self.COLORS:
            return self.COLORS[record.levelno] + text + self.RESET
        return text


def get_logger(name: str, use_color: Optional[bool] = None) -> logging.Logger:
    """
    `name`のロガーを返す. 初回だけstderrへのハンドラを付ける.

    Parameters
    ----------
    name: str
        logger name, usually `__name__`
    use_color: bool or None
        None picks color only when stderr is a terminal
    """
    if use_color is None:
        use_color = sys.stderr.isatty()

    logger = logging.getLogger(name)

    # when logger is new
    if len(logger.handlers) == 0:
        logger.setLevel(cfg.LOG_LEVEL)
        ch = logging.StreamHandler(sys.stderr)
        ch.setFormatter(ColorFormatter(use_color))
        logger.addHandler(ch)
        logger.propagate = False

    return logger


def set_level(level: int) -> None:
    """pyslocc配下の全ロガーのレベルを変更する"""
    for name, logger in logging.root.manager.loggerDict.items():
        if name.startswith("pyslocc") and isinstance(logger, logging.Logger):
            logger.setLevel(level)
            for h in logger.handlers:
                h.setLevel(level)
    cfg.LOG_LEVEL = level
