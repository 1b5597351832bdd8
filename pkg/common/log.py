"""Logger setup shared by every entry point."""
import os
import sys
from typing import Optional

from loguru import logger

from config.settings import LOG_CONFIG

CONSOLE_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}"


def setup_logging(name: str, level: Optional[str] = None, log_dir: Optional[str] = None) -> None:
    """Console sink at ``level`` plus a daily-rotated DEBUG file sink under ``log_dir``."""
    level = (level or LOG_CONFIG["level"]).upper()
    log_dir = log_dir or LOG_CONFIG["log_dir"]
    logger.remove()
    logger.add(sys.stdout, format=CONSOLE_FORMAT, level=level)
    os.makedirs(log_dir, exist_ok=True)
    logger.add(os.path.join(log_dir, f"{name}_{{time:YYYY-MM-DD}}.log"), rotation="1 day", level="DEBUG")
