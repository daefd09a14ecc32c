import logging
import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

STEKLOV_THREADS = os.getenv("STEKLOV_THREADS")
STEKLOV_LOG_LEVEL = os.getenv("STEKLOV_LOG_LEVEL", "WARNING")
STEKLOV_OUTPUT_DIR = os.getenv("STEKLOV_OUTPUT_DIR", ".")


def get_thread_count(override: Optional[int] = None) -> int:
    if override is not None and override > 0:
        return override
    value = os.getenv("STEKLOV_THREADS", STEKLOV_THREADS)
    if value:
        try:
            threads = int(value)
            if threads > 0:
                return threads
        except ValueError:
            logging.getLogger(__name__).warning("ignoring STEKLOV_THREADS=%r", value)
    return min(8, os.cpu_count() or 1)


def configure_logging(verbose: bool = False):
    level = logging.DEBUG if verbose else getattr(logging, STEKLOV_LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
