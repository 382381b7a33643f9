"""
Ordered parallel map for the Monte Carlo / enumeration reductions.

Work units are fixed by the caller (never by the worker count) and results come back in
submission order, so a reduction over them is bitwise identical for any --threads value.
"""
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

import numpy as np

from config.config import THREADS

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def ordered_map(fn: Callable[[T], R], tasks: Iterable[T], threads: int = None) -> List[R]:
    threads = THREADS if threads is None else max(1, int(threads))
    if threads == 1:
        return [fn(task) for task in tasks]

    results: List[R] = []
    window = deque()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for task in tasks:
            window.append(pool.submit(fn, task))
            # Bounded window keeps lazily generated tasks (subset chunks) from piling up
            if len(window) >= 2 * threads:
                results.append(window.popleft().result())
        while window:
            results.append(window.popleft().result())
    return results


def ordered_sum(parts: List[np.ndarray]) -> np.ndarray:
    """Sum of equally shaped partial results, accumulated in list order."""
    if not parts:
        raise ValueError("nothing to reduce")
    return np.sum(np.stack(parts, axis=0), axis=0)
