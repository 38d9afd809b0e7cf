"""Internal-parallelism cap via the DIFFCOP_THREADS environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    """Worker cap from DIFFCOP_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("DIFFCOP_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def map_columns(fn, items):
    """Order-preserving map, threaded when DIFFCOP_THREADS > 1."""
    n = thread_count()
    items = list(items)
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
