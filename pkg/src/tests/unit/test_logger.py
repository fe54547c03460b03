import contextlib
import logging
import sys

from loguru import logger as loguru_logger

from tichain.core import logger as logger_module
from tichain.core.config import env
from tichain.core.logger import InterceptHandler, format_array


@contextlib.contextmanager
def _capture_logs():
    records = []
    sink_id = loguru_logger.add(records.append, level="DEBUG", format="{message}")
    try:
        yield records
    finally:
        loguru_logger.remove(sink_id)


def test_intercept_handler_forwards_stdlib_records():
    """Records from stdlib loggers (scipy, warnings) reach the loguru sinks."""
    std_logger = logging.getLogger("tichain.test.intercept")
    std_logger.handlers = [InterceptHandler()]
    std_logger.propagate = False
    std_logger.setLevel(logging.DEBUG)

    with _capture_logs() as records:
        std_logger.warning("ARPACK is slow today")

    assert any("ARPACK is slow today" in str(r) for r in records)


def test_intercept_handler_maps_unknown_levels_to_numbers():
    """Custom stdlib levels without a loguru name are forwarded by number."""
    std_logger = logging.getLogger("tichain.test.custom_level")
    std_logger.handlers = [InterceptHandler()]
    std_logger.propagate = False
    std_logger.setLevel(1)

    with _capture_logs() as records:
        std_logger.log(25, "between info and warning")

    assert any("between info and warning" in str(r) for r in records)


def test_setup_logger_writes_json_when_configured(mocker, capsys):
    """LOG_JSON switches the stderr sink to serialized records."""
    mocker.patch.object(env, "LOG_JSON", True)
    mocker.patch.object(env, "LOGURU_LEVEL", "INFO")
    try:
        logger_module.setup_logger()
        logger_module.logger.info("solved ring")
        err = capsys.readouterr().err
        assert '"message": "solved ring' in err
    finally:
        loguru_logger.remove()
        loguru_logger.add(sys.stderr, level="WARNING")


def test_setup_logger_keeps_stdout_clean(mocker, capsys):
    """Log lines never land on stdout, which carries command output."""
    mocker.patch.object(env, "LOG_JSON", False)
    mocker.patch.object(env, "LOGURU_LEVEL", "DEBUG")
    mocker.patch.object(env, "LOG_FILE", None)
    try:
        logger_module.setup_logger()
        logger_module.logger.debug("eigsh converged")
        captured = capsys.readouterr()
        assert "eigsh converged" in captured.err
        assert "eigsh converged" not in captured.out
    finally:
        loguru_logger.remove()
        loguru_logger.add(sys.stderr, level="WARNING")


def test_format_array_truncates_long_sequences():
    """Long arrays are shortened for DEBUG lines."""
    assert format_array([1, 2, 3]) == "[1, 2, 3]"
    assert format_array(list(range(20)), limit=2) == "[0, 1, ...]"
    assert format_array(None) is None
