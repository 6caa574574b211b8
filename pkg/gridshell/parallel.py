import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor

_state = {}


def _init_worker(setup, payload):
    _state["context"] = setup(payload)


def _call(args):
    task, item = args
    return task(_state["context"], item)


def parallel_map(task, items, setup, payload, workers=1, chunksize=None):
    """
    Run `task(context, item)` over `items`, where `context = setup(payload)`
    is built once per worker process. Results keep the order of `items`.
    """
    items = list(items)
    if workers <= 1 or len(items) < 2:
        context = setup(payload)
        return [task(context, item) for item in items]
    if chunksize is None:
        chunksize = max(1, len(items) // (8 * workers))
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_init_worker,
        initargs=(setup, payload),
        mp_context=mp.get_context("spawn"),
    ) as pool:
        return list(
            pool.map(_call, [(task, x) for x in items], chunksize=chunksize)
        )
