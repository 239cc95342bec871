"""Optional spawn worker pool for embarrassingly parallel sampling.

Sized by SHIFTFORGE_THREADS (default 1 = serial). Results always come back in
input order, so the schedule never changes a report.
"""

from __future__ import annotations

import logging

from shiftforge import params

log = logging.getLogger(__name__)

_pool = None
_pool_size: int | None = None


def worker_count(requested=None):
    n = params.THREADS if requested is None else requested
    return max(1, int(n))


def _warmup_noop(_unused):
    return True


def init_pool(n_workers, warm=True):
    """Spin up (or reuse) a spawn pool. Returns None for n_workers <= 1."""
    if n_workers is None or n_workers <= 1:
        return None
    import multiprocessing as mp
    global _pool, _pool_size
    if _pool is not None and _pool_size == n_workers:
        return _pool
    shutdown_pool()
    ctx = mp.get_context('spawn')
    _pool = ctx.Pool(n_workers)
    _pool_size = n_workers
    log.info("[pool] spawned %d workers", n_workers)
    if warm:
        _pool.map(_warmup_noop, list(range(n_workers)))
    return _pool


def shutdown_pool():
    global _pool, _pool_size
    if _pool is not None:
        try:
            _pool.terminate()
            _pool.join()
        except Exception:
            pass
        _pool = None
        _pool_size = None


def parallel_map(fn, items, workers=None):
    """map(fn, items) in input order; `fn` must be a module-level function."""
    items = list(items)
    n = worker_count(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    pool = init_pool(min(n, len(items)))
    return pool.map(fn, items)
