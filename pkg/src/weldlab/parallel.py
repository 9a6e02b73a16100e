"""Worker-pool sizing; WELDLAB_THREADS caps every pool in the package."""

import os
from concurrent.futures import ThreadPoolExecutor


def threads():
    raw = os.environ.get("WELDLAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items):
    """Order-preserving map over a thread pool of ``threads()`` workers."""
    items = list(items)
    n = threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
