"""Deterministic work sharding.

Parallel paths in this package follow one rule: split the work into
contiguous chunks, process chunks independently, and concatenate results in
chunk order.  Output is then byte-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def split_chunks(items: Sequence[T], parts: int) -> list[Sequence[T]]:
    parts = max(1, min(parts, len(items)))
    size, extra = divmod(len(items), parts)
    chunks = []
    start = 0
    for i in range(parts):
        stop = start + size + (1 if i < extra else 0)
        chunks.append(items[start:stop])
        start = stop
    return chunks


def map_chunked(
    worker_fn: Callable[[Sequence[T]], list[R]],
    items: Sequence[T],
    workers: int = 1,
) -> list[R]:
    """worker_fn over contiguous chunks; results concatenated in order."""
    if workers <= 1 or len(items) <= 1:
        return worker_fn(items)
    chunks = split_chunks(items, workers)
    with ThreadPoolExecutor(max_workers=len(chunks)) as ex:
        parts = list(ex.map(worker_fn, chunks))
    return [r for part in parts for r in part]
