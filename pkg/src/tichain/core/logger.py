import inspect
import logging
import sys

from loguru import logger

from tichain.core.config import env

# Libraries whose stdlib records are routed into loguru.
_ROUTED_LOGGERS = ("py.warnings", "scipy", "numpy", "prometheus_client")


def _loguru_level(record: logging.LogRecord) -> str | int:
    try:
        return logger.level(record.levelname).name
    except ValueError:
        return record.levelno


class InterceptHandler(logging.Handler):
    """Re-emit stdlib records through loguru, attributed to the original caller."""

    def emit(self, record: logging.LogRecord) -> None:
        frame, depth = inspect.currentframe(), 0
        while frame and (depth == 0 or frame.f_code.co_filename == logging.__file__):
            frame = frame.f_back
            depth += 1
        logger.opt(depth=depth, exception=record.exc_info).log(
            _loguru_level(record), record.getMessage()
        )


def _sinks() -> list[dict]:
    level = env.LOGURU_LEVEL.upper()
    if env.LOG_JSON:
        return [
            {
                "sink": sys.stderr,
                "level": level,
                "serialize": True,
                "backtrace": True,
                "diagnose": False,
            }
        ]
    # stdout is reserved for command output
    sinks = [{"sink": sys.stderr, "level": level}]
    if env.LOG_FILE:
        sinks.append(
            {
                "sink": env.LOG_FILE,
                "level": level,
                "rotation": env.LOG_ROTATION,
                "compression": env.LOG_COMPRESSION,
                "backtrace": True,
                "diagnose": True,
            }
        )
    return sinks


def setup_logger() -> None:
    for name in _ROUTED_LOGGERS:
        routed = logging.getLogger(name)
        routed.handlers = []
        routed.propagate = True
    logging.basicConfig(
        handlers=[InterceptHandler()],
        level=getattr(logging, env.LOGURU_LEVEL.upper(), logging.INFO),
        force=True,
    )
    # ARPACK and LinAlg warnings arrive through the warnings module
    logging.captureWarnings(True)
    logger.configure(handlers=_sinks())


def format_array(values, limit=8):
    """Short repr of a numeric sequence for DEBUG lines."""
    if values is None:
        return None
    flat = [f"{float(v):.6g}" for v in list(values)[:limit]]
    suffix = ", ..." if len(values) > limit else ""
    return f"[{', '.join(flat)}{suffix}]"
