import argparse
import sys
import threading
import time
from pathlib import Path

# Ensure repository root is on sys.path so `from src...` works when running this script directly
repo_root = str(Path(__file__).resolve().parent.parent)
if repo_root not in sys.path:
    sys.path.insert(0, repo_root)

from src.logs import configure_logging
from src.main import verify_equivalence, verify_lpde, verify_pfaff, verify_schemes
from src.settings import Settings


def timed_suite(name, fn, timings, lock):
    start = time.time()
    try:
        checks = fn()
        failed = sum(not c['pass'] for c in checks)
    except Exception as e:
        print('suite error', name, e)
        failed = -1
    with lock:
        timings.append((name, time.time() - start, failed))


def run_benchmark(n_max=2, seed=0, concurrency=4, draws=5):
    settings = Settings()
    suites = []
    for n in range(1, n_max + 1):
        suites += [(f'lpde n={n}', lambda n=n: verify_lpde(n, seed, settings, draws)),
                   (f'pfaff main n={n}', lambda n=n: verify_pfaff('main', n, seed, settings, 1)),
                   (f'scheme n={n}', lambda n=n: verify_schemes(n, seed, settings, draws)),
                   (f'equivalence n={n}', lambda n=n: verify_equivalence(n, seed, settings, draws))]

    # split into concurrency buckets
    buckets = [suites[i::concurrency] for i in range(concurrency)]
    timings = []
    lock = threading.Lock()
    threads = []
    start = time.time()
    for b in buckets:
        t = threading.Thread(target=lambda b=b: [timed_suite(nm, fn, timings, lock) for nm, fn in b], daemon=True)
        threads.append(t)
        t.start()

    for t in threads:
        t.join()
    elapsed = time.time() - start
    for name, secs, failed in sorted(timings):
        print(f'{name:<24} {secs:8.2f}s  failed={failed}')
    print(f'Benchmark completed: {len(suites)} suites in {elapsed:.2f}s')


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description="Tiempos de las baterias de verificacion")
    parser.add_argument("--n-max", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--concurrency", type=int, default=4)
    parser.add_argument("--draws", type=int, default=5)
    args = parser.parse_args()
    configure_logging(log_file='')
    run_benchmark(args.n_max, args.seed, args.concurrency, args.draws)
