"""Reproducible random streams and chunked Monte Carlo.

Every chunk of every simulation owns a counter-based generator keyed by
``(seed, *key)``, so results do not depend on how chunks are spread over
workers.
"""

from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
import logging
from typing import Callable, Iterator, TypeVar

import numpy as np

log = logging.getLogger(__name__)
CHUNK = 10_000
T = TypeVar("T")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator of substream ``key`` under ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def chunks(runs: int, size: int = CHUNK) -> Iterator[tuple[int, int]]:
    """Yield ``(index, length)`` for consecutive chunks covering ``runs``."""
    index = 0
    for start in range(0, runs, size):
        yield index, min(size, runs - start)
        index += 1


def map_chunks(
    func: Callable[[int, int], T], runs: int, workers: int = 1, size: int = CHUNK
) -> list[T]:
    """Call ``func(index, length)`` for every chunk, in chunk order."""
    work = list(chunks(runs, size))
    log.debug("%d runs in %d chunks on %d workers", runs, len(work), workers)
    if workers <= 1:
        return [func(i, n) for i, n in work]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda item: func(*item), work))
