"""Thread-pool map capped by the QSPSKT_THREADS environment variable."""

import os
from concurrent.futures import ThreadPoolExecutor


def max_workers():
    try:
        n = int(os.environ.get("QSPSKT_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def pmap(fn, items, workers=None):
    """Ordered map; runs in a thread pool when more than one worker is allowed."""
    items = list(items)
    n = max_workers() if workers is None else max(1, workers)
    if n == 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
