"""Tests for `prosokit.utils.logger` together with the stage decorator."""

import logging
import logging.handlers
import re
import time
from collections.abc import Generator
from pathlib import Path

import pytest

from prosokit.decorators.log import log_stage
from prosokit.utils.logger import _set_level, init_logger

MODULE_LOGGER = "prosokit.prosody.recipes"


@pytest.fixture(autouse=True)
def _reset_logger() -> Generator[None, None, None]:
    """Close the handlers installed on the package logger by each test."""
    yield
    logger = logging.getLogger("prosokit")
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


def _handlers(logger: logging.Logger) -> tuple[logging.Handler | None, logging.Handler | None]:
    console = next(
        (h for h in logger.handlers if not isinstance(h, logging.FileHandler)), None
    )
    file = next(
        (h for h in logger.handlers if isinstance(h, logging.handlers.RotatingFileHandler)),
        None,
    )
    return console, file


def test_set_level() -> None:
    """Test the conversion of logging levels.

    This function tests the following scenarios:
        - Names in any case and numbers are accepted.
        - None selects the default level.
        - Unknown names raise, listing the valid ones.
    """
    assert _set_level("DEBUG") == logging.DEBUG
    assert _set_level("warning") == logging.WARNING
    assert _set_level(logging.INFO) == logging.INFO
    assert _set_level(None, default_level="ERROR") == logging.ERROR

    with pytest.raises(ValueError, match=re.escape("Invalid logging level: LOUD. Valid levels")):
        _set_level("LOUD")


def test_package_logger(capfd: pytest.CaptureFixture[str]) -> None:
    """Test the default set-up of the package logger.

    This function tests the following scenarios:
        - The logger is named ``prosokit`` and does not propagate.
        - A single console handler, no file.
        - Module loggers below ``prosokit`` reach stderr with their own name, stdout stays
          empty.
    """
    logger = init_logger(level="INFO")
    assert logger.name == "prosokit"
    assert logger.propagate is False
    console, file = _handlers(logger)
    assert console is not None
    assert file is None
    assert len(logger.handlers) == 1

    logging.getLogger(MODULE_LOGGER).info("3 utterances to augment")
    logging.getLogger(MODULE_LOGGER).debug("hidden below INFO")
    captured = capfd.readouterr()
    assert captured.out == ""
    assert f"{MODULE_LOGGER} - INFO - 3 utterances to augment" in captured.err
    assert "hidden below INFO" not in captured.err


def test_log_folder(tmp_path: Path, capfd: pytest.CaptureFixture[str]) -> None:
    """Test the rotating log file written next to the console output.

    This function tests the following scenarios:
        - The file is named after the logger and kept in the requested folder.
        - Console and file handlers have their own levels; the logger takes the lowest.
        - Each destination filters by its own level.
    """
    folder = tmp_path / "logs"
    logger = init_logger(
        level="INFO", level_console="WARNING", level_file="DEBUG", output_folder=folder
    )
    assert logger.level == logging.DEBUG
    console, file = _handlers(logger)
    assert console is not None
    assert file is not None
    assert (console.level, file.level) == (logging.WARNING, logging.DEBUG)

    module_logger = logging.getLogger(MODULE_LOGGER)
    module_logger.debug("frame 12 committed")
    module_logger.warning("utt03 failed")
    file.flush()

    (log_file,) = folder.iterdir()
    assert re.fullmatch(r"prosokit_\d{8}_\d{6}\.log", log_file.name)
    content = log_file.read_text(encoding="utf-8")
    assert "frame 12 committed" in content
    assert "utt03 failed" in content

    err = capfd.readouterr().err
    assert "utt03 failed" in err
    assert "frame 12 committed" not in err


def test_stage_timing_in_log_file(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Test the stage messages written through the package logger.

    This function tests the following scenarios:
        - Start and end banners frame the stage.
        - The elapsed time is reported with millisecond precision.
    """
    ticks = iter([10.0, 11.5])
    monkeypatch.setattr(time, "perf_counter", lambda: next(ticks))
    logger = init_logger(level="INFO", output_folder=tmp_path, output_console=False)

    @log_stage(logging.getLogger("prosokit.corpus.stats"), "stats")
    def stage() -> str:
        return "done"

    assert stage() == "done"
    _, file = _handlers(logger)
    assert file is not None
    file.flush()

    (log_file,) = tmp_path.iterdir()
    lines = [line.split(" - ")[-1] for line in log_file.read_text("utf-8").splitlines()]
    assert lines == [
        "-" * len("'stats' started"),
        "'stats' started",
        "'stats' finished in 1.500 s",
        "=" * len("'stats' finished in 1.500 s"),
    ]


def test_colored_console(capfd: pytest.CaptureFixture[str]) -> None:
    """Test that colors are added per level only on request."""
    init_logger(level="DEBUG", colored_console=True)
    module_logger = logging.getLogger(MODULE_LOGGER)
    module_logger.debug("debug")
    module_logger.info("info")
    module_logger.warning("warning")
    module_logger.error("error")
    err = capfd.readouterr().err
    for color in ("\033[0;36m", "\033[0;32m", "\033[0;33m", "\033[0;31m"):
        assert color in err

    init_logger(level="DEBUG", colored_console=False)
    module_logger.error("error")
    assert "\033[" not in capfd.readouterr().err


def test_init_logger_replaces_handlers(capfd: pytest.CaptureFixture[str]) -> None:
    """Test that a second initialization replaces the handlers.

    This function tests the following scenarios:
        - Calling init_logger twice leaves a single console handler.
        - Each message is written once, to stderr only.
        - Invalid levels are rejected.
    """
    init_logger(level="INFO")
    logger = init_logger(level="INFO")
    assert len(logger.handlers) == 1
    logging.getLogger(MODULE_LOGGER).info("only on stderr")

    captured = capfd.readouterr()
    assert captured.out == ""
    assert captured.err.count("only on stderr") == 1

    with pytest.raises(ValueError, match="Invalid logging level"):
        init_logger(level="LOUD")
