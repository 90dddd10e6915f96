from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np
from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")


# ==================================================
# DECIBELS
# ==================================================
def db_to_linear(value_db):
    """Power ratio in dB -> linear."""
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    """
    Linear power ratio -> dB.
    Zero maps to -inf without a warning.
    """
    value = np.asarray(value, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(value)


# ==================================================
# SEEDS
# ==================================================
def child_seed(seed: int, *keys: int) -> np.random.SeedSequence:
    """
    Independent seed for one (stream, index, ...) leaf of the seed tree.
    Same keys -> same stream, regardless of worker count or order.
    """
    return np.random.SeedSequence([int(seed), *[int(k) for k in keys]])


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(child_seed(seed, *keys))


def split_trials(trials: int, chunk: int) -> list[int]:
    """Chunk sizes covering `trials`; the last chunk may be short."""
    if trials < 1:
        return []
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


# ==================================================
# WORKER POOL
# ==================================================
def map_tasks(
    func: Callable[[T], R],
    tasks: Sequence[T] | Iterable[T],
    workers: int = 1,
    desc: str | None = None,
) -> list[R]:
    """
    Ordered map over tasks, optionally on a process pool.

    Output order follows input order, so merged results are
    identical for any worker count.
    """
    tasks = list(tasks)
    progress = tqdm(total=len(tasks), desc=desc, unit="task", disable=None, leave=False)

    try:
        if workers <= 1 or len(tasks) <= 1:
            results = []
            for task in tasks:
                results.append(func(task))
                progress.update(1)
            return results

        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = []
            for result in executor.map(func, tasks):
                results.append(result)
                progress.update(1)
            return results
    finally:
        progress.close()
