"""Work-stealing parallel search.

Every worker owns a :class:`SearchEngine` and its own nogood slots. Worker 0
starts at the root; idle workers pick victims in a seeded random order and
take the upper half of the victim's shallowest splittable candidate loop.
The pool finishes once no task is running.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from .config import MatchConfig
from .graph import Graph
from .nogood import NogoodStore
from .plan import GCS, MatchingOrder
from .search import (
    EmbeddingSink,
    MatchResult,
    MatchStats,
    SearchControl,
    SearchEngine,
    SearchInterrupted,
    _finish,
    match_query,
    prepare_gcs,
)

IDLE_SLEEP = 0.0005


def _run(engine: SearchEngine, control: SearchControl, prefix=(), only=None) -> bool:
    """Run one task; False once the search has been stopped."""
    try:
        engine.run_task(prefix, only)
        return True
    except SearchInterrupted:
        return False
    finally:
        control.task_done()


def _worker(
    w: int, engines: List[SearchEngine], control: SearchControl, seed: int
) -> None:
    engine = engines[w]
    if w == 0 and not _run(engine, control):
        return
    rng = np.random.default_rng([seed, w])
    others = [i for i in range(len(engines)) if i != w]
    while not control.stopped and not control.idle():
        task = None
        for victim in rng.permutation(others) if others else ():
            task = engines[int(victim)].split_work()
            if task is not None:
                break
        if task is None:
            time.sleep(IDLE_SLEEP)
            continue
        prefix, stolen = task
        if not _run(engine, control, prefix, stolen):
            return


def search_parallel(
    gcs: GCS, cfg: MatchConfig, sink: Optional[EmbeddingSink] = None
) -> MatchResult:
    """Search a prepared GCS with ``cfg.thread_count`` workers."""
    threads = cfg.thread_count
    control = SearchControl(cfg, sink)
    engines = [
        SearchEngine(
            gcs,
            cfg,
            control,
            store=NogoodStore(),
            worker=w,
            stride=threads,
            lock=threading.Lock(),
        )
        for w in range(threads)
    ]
    control.task_started()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(_worker, w, engines, control, cfg.seed) for w in range(threads)
        ]
        for f in futures:
            f.result()
    stats = MatchStats()
    for engine in engines:
        stats.merge(engine.stats)
    return _finish(control, stats)


def parallel_match(
    query: Graph,
    data: Graph,
    cfg: MatchConfig,
    sink: Optional[EmbeddingSink] = None,
    *,
    order: Optional[MatchingOrder] = None,
) -> MatchResult:
    """Enumerate with ``cfg.thread_count`` workers; one thread runs sequentially."""
    if cfg.thread_count == 1:
        return match_query(query, data, cfg, sink, order=order)
    gcs = prepare_gcs(query, data, cfg, order)
    return search_parallel(gcs, cfg, sink)
