"""
Logger Config
Console logging for suite runs
"""

import logging
import sys
from btbounds.config import get_settings


def setup_logging(debug: bool = None):
    """Configure the root logger once per process"""
    settings = get_settings()
    if debug is None:
        debug = settings.debug

    log_level = logging.DEBUG if debug else getattr(logging, settings.log_level)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # stdout carries the JSON report; re-running in one process must not stack handlers
    if not any(getattr(h, "_btbounds", False) for h in root_logger.handlers):
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        console_handler._btbounds = True
        root_logger.addHandler(console_handler)

    # Supress noisy libraries
    logging.getLogger("asyncio").setLevel(logging.WARNING)

    return root_logger
