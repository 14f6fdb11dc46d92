# pylint: disable = missing-module-docstring
import logging
from logging import StreamHandler

__LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s - %(message)s"
PACKAGE_LOGGER_NAME: str = "o2orl"
_QUIET: bool = False


def create_logger(logger_name: str, level: int = logging.DEBUG) -> logging.Logger:
    """Create logger with the given name.

    A console handler is attached only once, so modules may call this
    repeatedly without duplicating output.

    Args:
        logger_name: the name of the logger
        level: logging level of the created logger. Defaults to DEBUG.

    Return:
        created logger object
    """

    result: logging.Logger = logging.getLogger(logger_name)
    result.setLevel(max(level, logging.WARNING) if _QUIET else level)

    if not any(getattr(handler, "_o2orl", False) for handler in result.handlers):
        formatter: logging.Formatter = logging.Formatter(__LOG_FORMAT)
        console_handler = StreamHandler()
        console_handler.setFormatter(formatter)
        console_handler._o2orl = True  # type: ignore # pylint: disable = protected-access
        result.addHandler(console_handler)
    result.propagate = True

    return result


def set_quiet(quiet: bool) -> None:
    """Raise or restore the verbosity of every package logger.

    Loggers created afterwards follow the same setting.

    Args:
        quiet: if True only warnings and errors are emitted.
    """
    # pylint: disable = global-statement
    global _QUIET
    _QUIET = quiet
    level: int = logging.WARNING if quiet else logging.DEBUG
    for name, logger in logging.root.manager.loggerDict.items():
        if name.startswith(PACKAGE_LOGGER_NAME) and isinstance(
            logger, logging.Logger
        ):
            logger.setLevel(level)
