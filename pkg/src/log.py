# src/log.py
import logging
import sys

LOGGER_NAME = "src"


def setup_logging(level: str = "WARNING") -> logging.Logger:
    """패키지 로거 설정 (stderr 출력, 중복 핸들러 방지)"""
    logger = logging.getLogger(LOGGER_NAME)
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter(
            "[%(asctime)s] [%(levelname)s] %(name)s: %(message)s", "%H:%M:%S"
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger
