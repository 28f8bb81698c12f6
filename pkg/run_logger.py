"""
Run logging: console plus one log file per day under the log directory
"""
import logging
import os
from datetime import datetime
from typing import Optional

LOG_FORMAT = "[%(asctime)s] %(levelname)s %(name)s: %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def get_log_file(log_dir: str) -> str:
    """Get daily log file path"""
    date_str = datetime.now().strftime('%Y-%m-%d')
    return os.path.join(log_dir, f'braid_lab_{date_str}.log')


def setup_logging(log_dir: Optional[str] = 'logs', verbose: bool = False) -> Optional[str]:
    """
    Install handlers on the root logger and return the log file path.

    Passing log_dir=None logs to the console only.
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    formatter = logging.Formatter(LOG_FORMAT, DATE_FORMAT)

    console = logging.StreamHandler()
    console.setFormatter(formatter)
    console.setLevel(logging.DEBUG if verbose else logging.WARNING)
    root.addHandler(console)

    if not log_dir:
        return None
    os.makedirs(log_dir, exist_ok=True)
    log_file = get_log_file(log_dir)
    file_handler = logging.FileHandler(log_file, encoding='utf-8')
    file_handler.setFormatter(formatter)
    root.addHandler(file_handler)
    return log_file


def banner(title: str, width: int = 60):
    """Section header for console reports"""
    print("=" * width)
    print(title)
    print("=" * width)
