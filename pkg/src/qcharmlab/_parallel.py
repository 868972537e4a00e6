import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def n_threads():
    try:
        return max(1, int(os.environ.get("QCHARMLAB_THREADS", "1")))
    except ValueError:
        return 1


def chunked(func, n, chunk=2048):
    """Apply ``func(start, stop)`` over ``range(n)`` in chunks and concatenate.

    ``func`` returns a tuple of arrays. Chunk boundaries do not depend on the
    thread count, so results are identical for any ``QCHARMLAB_THREADS``.
    """
    bounds = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    if not bounds:
        return func(0, 0)
    threads = n_threads()
    if threads == 1 or len(bounds) == 1:
        parts = [func(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: func(*ab), bounds))
    return tuple(np.concatenate(cols) for cols in zip(*parts))
