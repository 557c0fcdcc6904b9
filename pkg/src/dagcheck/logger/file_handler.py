import logging
from logging.handlers import RotatingFileHandler

# 64 MiB per file; fuzzing campaigns log per run, not per day
DEFAULT_MAX_BYTES = 64 * 1024 * 1024


def get_file_handler(
    log_level: int,
    file_name: str,
    max_bytes: int = DEFAULT_MAX_BYTES,
    backup_count: int = 10,
):
    handler = RotatingFileHandler(
        file_name,
        maxBytes=max_bytes,
        backupCount=backup_count,
        encoding="utf-8",
    )
    handler.setLevel(log_level)
    handler.setFormatter(logging.Formatter("%(asctime)s - %(levelname)s - %(message)s"))
    return handler
