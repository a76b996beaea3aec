"""Log the execution of pipeline stages."""

import logging
import time
from collections.abc import Callable
from typing import Any

import wrapt


def log_stage(logger: logging.Logger, message: str, ending: bool = True) -> Any:
    """Log the start, the end and the duration of a function or method.

    Parameters
    ----------
    logger : Logger
        Instance of the logger.
    message : str
        Name of the stage being executed.
    ending : bool
        Show the end message with the elapsed time.

    Returns
    -------
    Callable[..., Any]
        The decorated function or method.

    Examples
    --------
    ```python
    @log_stage(logger, "augment")
    def apply_recipe(...):
        ...
    ```
    """

    @wrapt.decorator
    def wrapper(
        wrapped: Callable[..., Any],
        instance: Any | None,
        args: tuple[Any, ...],
        kwargs: dict[str, Any],
    ) -> Any:
        start_message = f"'{message}' started"
        logger.info("-" * len(start_message))
        logger.info(start_message)

        start = time.perf_counter()
        result = wrapped(*args, **kwargs)
        elapsed = time.perf_counter() - start

        if ending:
            end_message = f"'{message}' finished in {elapsed:.3f} s"
            logger.info(end_message)
            logger.info("=" * len(end_message))
        else:
            logger.info("=" * len(start_message))

        return result

    return wrapper
