import asyncio
import threading
from typing import Callable, List, Sequence, Tuple

from src.errors import ContractViolation
from src.logs import debug, log

Task = Tuple[str, Callable[[], object]]


def split_chunks(items: Sequence, num_chunks: int) -> List[list]:
    """
    Split items into num_chunks consecutive chunks; the first `remainder`
    chunks receive one extra item.

    Examples:
      4 items, 3 chunks -> [2, 1, 1]
      10 items, 3 chunks -> [4, 3, 3]
      2 items, 3 chunks -> [1, 1, 0]
    """
    if num_chunks < 1:
        raise ContractViolation(f"num_chunks must be >= 1, got {num_chunks}")
    total = len(items)
    chunk_size = total // num_chunks
    remainder = total % num_chunks

    chunks = []
    start = 0
    for i in range(num_chunks):
        end = min(start + chunk_size + (1 if i < remainder else 0), total)
        chunks.append(list(items[start:end]))
        debug(f"Chunk {i}: items {start}-{end - 1} ({end - start} total)")
        start = end
    return chunks


def _run_task(index: int, name: str, fn: Callable[[], object], results: list, errors: list, lock: threading.Lock):
    try:
        value = fn()
    except Exception as e:
        log(f"check {name} failed: {e}")
        with lock:
            errors.append((index, e))
        return
    with lock:
        results.append((index, name, value))


def run_checks_threaded(tasks: Sequence[Task]) -> List[Tuple[str, object]]:
    """One thread per task; results come back in submission order."""
    threads = []
    results, errors = [], []
    lock = threading.Lock()
    for i, (name, fn) in enumerate(tasks):
        t = threading.Thread(target=_run_task, args=(i, name, fn, results, errors, lock), daemon=False)
        threads.append(t)
        t.start()

    for t in threads:
        t.join()

    if errors:
        # first failure in submission order
        raise min(errors, key=lambda e: e[0])[1]
    return [(name, value) for _, name, value in sorted(results, key=lambda r: r[0])]


def map_points(fn: Callable, points: Sequence, num_threads: int = 4) -> list:
    """fn(point) for every point, fanned out over threads in consecutive chunks."""
    if not points:
        return []
    chunks = [c for c in split_chunks(points, min(num_threads, len(points))) if c]
    tasks = [(f'chunk {i}', lambda c=c: [fn(pt) for pt in c]) for i, c in enumerate(chunks)]
    out = []
    for _, values in run_checks_threaded(tasks):
        out.extend(values)
    return out


async def run_checks_async(tasks: Sequence[Task]) -> List[Tuple[str, object]]:
    coros = [asyncio.to_thread(fn) for _, fn in tasks]
    values = await asyncio.gather(*coros)
    return [(name, value) for (name, _), value in zip(tasks, values)]
