"""Parallelism cap from the ``LAMBDA_MHD_THREADS`` environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

__all__ = ["max_workers", "parallel_map"]

T = TypeVar("T")
R = TypeVar("R")


def max_workers() -> int:
    """Worker count: ``LAMBDA_MHD_THREADS`` if set and positive, else the CPU count."""
    raw = os.environ.get("LAMBDA_MHD_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n > 0:
            return n
    return max(1, os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Ordered map over ``items`` using at most :func:`max_workers` threads.

    Numpy kernels release the GIL, so per-slice work overlaps.
    """
    items = list(items)
    n = min(max_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
