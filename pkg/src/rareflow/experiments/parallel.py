"""Deterministic replication mapping.

Replication i always draws from the stream keyed by (master seed, prefix,
i), and per-replication outputs are gathered in index order, so results
are identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

__all__ = ["replication_stream", "map_replications"]


def replication_stream(master_seed: int, *key) -> np.random.Generator:
    """Independent generator for one replication (or named sub-task)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


def _run_chunk(fn, payload: dict, master_seed: int, prefix: tuple, lo: int, hi: int) -> np.ndarray:
    out = [fn(payload, replication_stream(master_seed, *prefix, i)) for i in range(lo, hi)]
    return np.asarray(out)


def map_replications(
    fn,
    payload: dict,
    n: int,
    master_seed: int,
    prefix: tuple = (),
    workers: int = 1,
) -> np.ndarray:
    """Stack fn(payload, rng_i) for i = 0..n-1.

    ``fn`` must be a module-level callable returning a scalar or a
    fixed-shape array (picklable together with ``payload`` when
    ``workers > 1``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if workers <= 1 or n < 2 * workers:
        return _run_chunk(fn, payload, master_seed, prefix, 0, n)
    chunk = max(1, math.ceil(n / (workers * 4)))
    bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(
                _run_chunk_star,
                [(fn, payload, master_seed, prefix, lo, hi) for lo, hi in bounds],
            )
        )
    return np.concatenate(parts, axis=0)


def _run_chunk_star(args) -> np.ndarray:
    return _run_chunk(*args)
