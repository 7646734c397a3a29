"""Deterministic chunked map over a forked process pool.

Results always come back in chunk order, so the merged output never depends
on the worker count.
"""

from __future__ import annotations

import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor

_SHARED = None


def default_workers() -> int:
    return os.cpu_count() or 1


def shared():
    return _SHARED


def chunked(seq, size):
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def ordered_map(func, chunks, state, workers=None):
    """Apply ``func(chunk)`` to every chunk; ``state`` is readable via shared()."""
    global _SHARED
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    previous, _SHARED = _SHARED, state
    try:
        if workers == 1 or len(chunks) < 2 or "fork" not in multiprocessing.get_all_start_methods():
            return [func(c) for c in chunks]
        mp = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=min(workers, len(chunks)), mp_context=mp) as pool:
            return list(pool.map(func, chunks))
    finally:
        _SHARED = previous
