"""Compare the numba and numpy water-level kernels.

Part 1 times the two kernel implementations side by side in this process
(needs numba installed). Part 2 runs the same end-to-end energy-efficient
water-filling workload in two fresh interpreters, one with
``EEMIMO_DISABLE_NUMBA=1``, and checks both give the same EE.

    python3 benchmarks/bench_kernels.py [--calls 20000] [--seeds 20]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from eemimo import kernels
from eemimo._accel import NUMBA_AVAILABLE

E2E_SNIPPET = r"""
import json, sys, time
from eemimo import PowerModel, generate_channels, kernels
from eemimo.solver import ee_iterative_waterfilling
seeds = int(sys.argv[1])
m = PowerModel()
chans = [generate_channels(s, 4, 4, 10, 1.0) for s in range(seeds)]
ee_iterative_waterfilling(chans[0], m)  # warm-up (JIT compile or cache load)
t = time.perf_counter()
ees = [ee_iterative_waterfilling(H, m).ee for H in chans]
print(json.dumps({'backend': kernels.BACKEND, 'seconds': time.perf_counter() - t,
                  'mean_ee': sum(ees) / len(ees)}))
"""


def _time(fn, args_list):
    fn(*args_list[0])  # compile / warm caches
    t = time.perf_counter()
    out = [fn(*a) for a in args_list]
    return time.perf_counter() - t, out


def kernel_bench(calls, rng):
    rows = []
    # typical problem sizes: up to min(N, M) <= 4 modes per user
    root_args, level_args = [], []
    for _ in range(calls):
        n = int(rng.integers(1, 5))
        d = np.ascontiguousarray(rng.uniform(0.1, 1e3, n))
        a, b, W, eta = rng.uniform(100, 500), rng.uniform(0, 1e6), 5e6, 0.38
        cap = kernels.ee_level_cap(d, W, eta)
        if b - cap * a < 0:
            root_args.append((d, a, b, W, eta, b / a, cap, 1e-10, 400))
        level_args.append((np.ascontiguousarray(rng.uniform(0.1, 1e3, 4 * n)),
                           rng.uniform(0.1, 50.0)))

    for name, loop, vec, args in (
            ('ee_water_level', kernels._ee_root_loop, kernels._ee_root_numpy, root_args),
            ('sum_power_water_level', kernels._sum_level_loop, kernels._sum_level_numpy,
             level_args)):
        t_loop, r_loop = _time(loop, args)
        t_vec, r_vec = _time(vec, args)
        first = lambda r: r[0] if isinstance(r, tuple) else r  # noqa: E731
        err = max(abs(first(x) - first(y)) / abs(first(y)) for x, y in zip(r_loop, r_vec))
        rows.append((name, len(args), t_loop, t_vec, err))
    return rows


def e2e_bench(seeds):
    results = {}
    for flag in ('0', '1'):
        env = dict(os.environ, EEMIMO_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, '-c', E2E_SNIPPET, str(seeds)],
                             env=env, check=True, capture_output=True, text=True)
        res = json.loads(out.stdout)
        results[res['backend']] = res
    return results


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument('--calls', type=int, default=20000)
    p.add_argument('--seeds', type=int, default=20)
    args = p.parse_args(argv)

    if NUMBA_AVAILABLE:
        print(f'kernel calls (numba loop vs numpy), {args.calls} random inputs')
        print(f"{'kernel':<24}{'calls':>8}{'numba s':>10}{'numpy s':>10}{'speedup':>9}{'max rel diff':>14}")
        for name, n, tl, tv, err in kernel_bench(args.calls, np.random.default_rng(0)):
            print(f'{name:<24}{n:>8}{tl:>10.3f}{tv:>10.3f}{tv / tl:>8.1f}x{err:>14.1e}')
    else:
        print('numba disabled or missing: skipping in-process kernel comparison')

    print(f'\nend to end: {args.seeds} instances, M=N=4, K=10, d=1 km')
    res = e2e_bench(args.seeds)
    for backend, r in res.items():
        print(f"{backend:<8}{r['seconds']:>8.2f} s   mean EE {r['mean_ee']:.10e}")
    if len(res) == 2:
        a, b = res['numba']['mean_ee'], res['numpy']['mean_ee']
        print(f"speedup {res['numpy']['seconds'] / res['numba']['seconds']:.2f}x, "
              f'EE agreement {abs(a - b) / b:.1e} relative')


if __name__ == '__main__':
    main()
