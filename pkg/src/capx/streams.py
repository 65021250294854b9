"""Reproducible random streams for block-parallel Monte Carlo.

Samples are generated in fixed-size blocks; block ``b`` always draws from
the stream keyed by ``(seed, tag, b)``. Which worker processes a block is
therefore irrelevant to the result.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 1 << 16

# stream tags keep independent uses of one seed from overlapping
SIMULATION = 0
BOOTSTRAP = 1
DIAGNOSTIC = 2


def block_rng(seed: int, block: int, tag=SIMULATION) -> np.random.Generator:
    """Generator for one block; ``tag`` is an int or a tuple of ints."""
    tag = tuple(tag) if isinstance(tag, tuple) else (tag,)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(*map(int, tag), int(block)))
    return np.random.Generator(np.random.PCG64(ss))


def effective_workers(n_workers: int) -> int:
    """Worker count capped by the ``CAPX_THREADS`` environment variable."""
    cap = os.environ.get("CAPX_THREADS")
    if cap:
        n_workers = min(n_workers, max(1, int(cap)))
    return max(1, n_workers)


def block_spans(n_total: int, block_size: int = BLOCK_SIZE):
    return [(b, min(block_size, n_total - b * block_size))
            for b in range((n_total + block_size - 1) // block_size)]


def map_blocks(fn, n_total: int, n_workers: int = 1):
    """Apply ``fn(block_index, block_len)`` to every block, results in block order."""
    spans = block_spans(n_total)
    workers = effective_workers(n_workers)
    if workers == 1 or len(spans) == 1:
        return [fn(b, m) for b, m in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: fn(*s), spans))
