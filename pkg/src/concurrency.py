"""
CoreMotif — Concurrency management: worker pool for row-block parallel work.
Results are merged in block order, so output never depends on the worker count.
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Sequence, Tuple, TypeVar

from config import effective_workers

logger = logging.getLogger("coremotif")

T = TypeVar("T")

# ── Thread Pools ──
_pools = {}  # type: Dict[int, ThreadPoolExecutor]
_pools_lock = threading.Lock()


def get_pool(workers: int) -> ThreadPoolExecutor:
    """Shared pool per worker count, created on first use."""
    with _pools_lock:
        pool = _pools.get(workers)
        if pool is None:
            pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="coremotif")
            _pools[workers] = pool
        return pool


def row_blocks(n: int, workers: int, min_block: int = 256) -> List[Tuple[int, int]]:
    """Split range(n) into contiguous [start, stop) blocks, at most one per worker."""
    if n <= 0:
        return []
    count = max(1, min(workers, (n + min_block - 1) // min_block))
    step = (n + count - 1) // count
    return [(start, min(start + step, n)) for start in range(0, n, step)]


def map_blocks(fn: Callable[[int, int], T], blocks: Sequence[Tuple[int, int]], workers: int = None) -> List[T]:
    """Run fn(start, stop) for every block; results come back in block order."""
    workers = effective_workers(workers)
    if workers == 1 or len(blocks) <= 1:
        return [fn(start, stop) for start, stop in blocks]

    pool = get_pool(workers)
    futures = [pool.submit(fn, start, stop) for start, stop in blocks]
    results = []
    for (start, stop), fut in zip(blocks, futures):
        try:
            results.append(fut.result())
        except Exception:
            logger.exception("Block [%d, %d) failed in worker pool", start, stop)
            raise
    return results


def get_pool_status() -> dict:
    """Return pool sizes for debug logging."""
    with _pools_lock:
        return {workers: {"max_workers": workers} for workers in _pools}


def shutdown_pools():
    """Graceful shutdown of all pools."""
    with _pools_lock:
        for pool in _pools.values():
            pool.shutdown(wait=False)
        _pools.clear()
