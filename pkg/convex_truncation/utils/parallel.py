"""Trial-level parallelism with a fixed-order gather."""

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, TypeVar

from convex_truncation.gauss.rng import RngStream

R = TypeVar("R")


def map_trials(
    fn: Callable[[int, RngStream], R],
    count: int,
    rng: RngStream,
    workers: Optional[int] = 1,
) -> List[R]:
    """Run fn(i, rng.spawn(i)) for i < count and return results in trial order.

    Trial i always owns substream i, so the returned list does not depend on `workers`.

    """
    if count < 0:
        raise ValueError("trial count must be non-negative, got %i" % count)
    streams = [rng.spawn(i) for i in range(count)]
    if workers is None or workers <= 1 or count <= 1:
        return [fn(i, stream) for i, stream in enumerate(streams)]

    results: List[Optional[R]] = [None] * count
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = {ex.submit(fn, i, stream): i for i, stream in enumerate(streams)}
        for f in as_completed(futures):
            # re-raises the first trial error with its traceback
            results[futures[f]] = f.result()
    return results
