"""Fixed-decomposition thread map.

Work is split into blocks of a constant size chosen by the caller, never
by the thread count, and block workers write into disjoint slices of
preallocated outputs. Results are therefore identical at any thread
count; threads only change wall time.
"""

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import InvalidArgumentError

ENV_THREADS = "WFDENSITY_THREADS"


def resolve_threads(threads=None):
    """CLI value wins, then the environment override, then single-thread."""
    if threads is None:
        raw = os.environ.get(ENV_THREADS)
        threads = int(raw) if raw else 1
    threads = int(threads)
    if threads < 1:
        raise InvalidArgumentError("thread count must be >= 1")
    return threads


def map_blocks(n_items, block_size, worker, threads=1):
    """Run worker(lo, hi) over fixed [lo, hi) blocks, possibly in threads."""
    blocks = [(lo, min(lo + block_size, n_items))
              for lo in range(0, n_items, block_size)]
    if threads <= 1 or len(blocks) <= 1:
        for lo, hi in blocks:
            worker(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda span: worker(*span), blocks))
