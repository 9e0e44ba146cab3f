import asyncio
import threading
import time

import pytest

from src.concurrency import map_points, run_checks_async, run_checks_threaded, split_chunks
from src.errors import ContractViolation, DomainError


def test_split_chunks_remainder_goes_first():
    assert [len(c) for c in split_chunks(list(range(4)), 3)] == [2, 1, 1]
    assert [len(c) for c in split_chunks(list(range(10)), 3)] == [4, 3, 3]
    assert [len(c) for c in split_chunks([1, 2], 3)] == [1, 1, 0]
    assert split_chunks([1, 2, 3, 4, 5], 2) == [[1, 2, 3], [4, 5]]
    with pytest.raises(ContractViolation):
        split_chunks([1], 0)


def test_threaded_results_keep_submission_order():
    def slow(v, delay):
        def fn():
            time.sleep(delay)
            return v
        return fn

    tasks = [('a', slow(1, 0.05)), ('b', slow(2, 0.0)), ('c', slow(3, 0.02))]
    assert run_checks_threaded(tasks) == [('a', 1), ('b', 2), ('c', 3)]
    assert run_checks_threaded([]) == []


def test_threaded_reraises_first_failure():
    def fail(msg):
        def fn():
            raise DomainError(msg)
        return fn

    tasks = [('ok', lambda: 1), ('first', fail('first')), ('second', fail('second'))]
    with pytest.raises(DomainError, match='first'):
        run_checks_threaded(tasks)


def test_map_points_uses_threads_and_keeps_order():
    seen = set()
    lock = threading.Lock()

    def square(x):
        with lock:
            seen.add(threading.get_ident())
        return x * x

    points = list(range(11))
    assert map_points(square, points, num_threads=3) == [x * x for x in points]
    assert len(seen) >= 1
    assert map_points(square, []) == []


def test_async_runner():
    tasks = [('x', lambda: 'x'), ('y', lambda: 'y')]
    assert asyncio.run(run_checks_async(tasks)) == [('x', 'x'), ('y', 'y')]
