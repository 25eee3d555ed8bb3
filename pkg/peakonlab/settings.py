"""
Process-level settings for peakonlab.
Values come from the environment (optionally a .env file) with documented defaults.
"""
import logging
import os
from typing import Dict, Optional

from dotenv import load_dotenv

load_dotenv()

LOG_FORMAT = "[%(name)s] %(message)s"


def get_worker_count() -> int:
    """Default number of concurrent sweep workers."""
    raw = os.getenv("PEAKONLAB_WORKERS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logging.getLogger(__name__).warning("Ignoring non-integer PEAKONLAB_WORKERS=%r", raw)
    return os.cpu_count() or 1


def get_log_level() -> str:
    return os.getenv("PEAKONLAB_LOG_LEVEL", "INFO").upper()


def get_output_dir() -> str:
    return os.getenv("PEAKONLAB_OUTPUT_DIR", "runs")


def get_runtime_config() -> Dict[str, object]:
    """Get the current runtime configuration."""
    return {
        "workers": get_worker_count(),
        "log_level": get_log_level(),
        "output_dir": get_output_dir(),
    }


def configure_logging(level: Optional[str] = None) -> None:
    """Install the bracketed-tag log format on the root logger."""
    logging.basicConfig(level=level or get_log_level(), format=LOG_FORMAT, force=True)
