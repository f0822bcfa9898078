"""
Asyncio helper functions.
"""
from __future__ import annotations
from typing import Callable, Iterable, Sequence, Any

import asyncio
from functools import partial
from concurrent.futures import ThreadPoolExecutor

from . import env, log

logger = log.getLogger('plinv.aio')

THREAD_COUNT = env.PLINV_THREADS

assert THREAD_COUNT > 0

# numpy releases the GIL in its kernels, so threads are enough for the checkers
aioThreadExecutor = ThreadPoolExecutor(
    max_workers=THREAD_COUNT,
    thread_name_prefix="plinv_aio_thread_"
)


async def run_async(func: Callable, *args, **kwargs):
    """
    Run a CPU-consuming function asynchronously.
    """
    loop = asyncio.get_running_loop()
    return (
        await loop.run_in_executor(aioThreadExecutor, partial(func, *args, **kwargs))
        if kwargs else
        await loop.run_in_executor(aioThreadExecutor, func, *args)
    )


async def _gather(calls: Sequence[tuple[Callable, tuple, dict]], return_exceptions: bool):
    return await asyncio.gather(
        *(run_async(func, *args, **kwargs) for func, args, kwargs in calls),
        return_exceptions=return_exceptions
    )


def gather_in_pool(calls: Iterable[tuple[Callable, tuple, dict]], return_exceptions: bool = False) -> list[Any]:
    """
    Run independent calls concurrently and return their results in call order.

    :param calls: ``(func, args, kwargs)`` triples
    :param return_exceptions: put raised exceptions into the result list instead of re-raising
    """
    calls = list(calls)
    if not calls:
        return []
    if THREAD_COUNT == 1 or len(calls) == 1:
        results = []
        for func, args, kwargs in calls:
            try:
                results.append(func(*args, **kwargs))
            except Exception as e:
                if not return_exceptions:
                    raise
                results.append(e)
        return results
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return list(asyncio.run(_gather(calls, return_exceptions)))
    # already inside a loop (e.g. called from a coroutine): fall back to the executor directly
    futures = [aioThreadExecutor.submit(func, *args, **kwargs) for func, args, kwargs in calls]
    results = []
    for future in futures:
        try:
            results.append(future.result())
        except Exception as e:
            if not return_exceptions:
                raise
            results.append(e)
    return results


def shutdown():
    aioThreadExecutor.shutdown(wait=False)
