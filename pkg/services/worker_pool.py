import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int = 1, label: str = "task") -> List[R]:
    """Apply ``fn`` to every item and return results in input order.

    Work units must carry their own seed; the pool only changes wall time.
    """
    items = list(items)
    total = len(items)
    if threads < 1:
        raise ValueError("threads must be at least 1")

    step = max(1, total // 10)
    results: List[R] = []
    if threads == 1 or total <= 1:
        for k, item in enumerate(items, start=1):
            results.append(fn(item))
            if k % step == 0 or k == total:
                logger.info("%s %d/%d", label, k, total)
        return results

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for k, result in enumerate(pool.map(fn, items), start=1):
            results.append(result)
            if k % step == 0 or k == total:
                logger.info("%s %d/%d", label, k, total)
    return results
