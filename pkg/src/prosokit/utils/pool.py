"""Process pool helpers."""

import logging
from collections.abc import Callable, Iterator, Sequence
from multiprocessing import Pool, cpu_count
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_jobs(jobs: int) -> int:
    """Number of worker processes; 0 or less means one per CPU.

    Examples
    --------
    >>> resolve_jobs(3)
    3
    >>> resolve_jobs(0) >= 1
    True
    """
    return jobs if jobs > 0 else max(1, cpu_count())


def ordered_map(
    func: Callable[[T], R], items: Sequence[T], jobs: int = 1, chunksize: int = 1
) -> Iterator[R]:
    """Apply `func` to every item, yielding results in input order.

    With one job (or at most one item) everything runs in the calling process. `func` and
    the items must be picklable otherwise.

    Parameters
    ----------
    func : Callable[[T], R]
        Module-level function.
    items : Sequence[T]
        Inputs.
    jobs : int, optional
        Worker processes, by default 1; 0 uses every CPU.
    chunksize : int, optional
        Items sent to a worker at once, by default 1.

    Yields
    ------
    R
        Results, in the order of `items`.

    Examples
    --------
    >>> list(ordered_map(abs, [-1, 2, -3]))
    [1, 2, 3]
    """
    workers = min(resolve_jobs(jobs), len(items))
    if workers <= 1:
        yield from map(func, items)
        return

    logger.debug("Processing %d items with %d workers", len(items), workers)
    with Pool(workers) as pool:
        yield from pool.imap(func, items, chunksize=chunksize)
