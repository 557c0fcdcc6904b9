from .slogger import configure_structlog

__all__ = ["configure_structlog"]
