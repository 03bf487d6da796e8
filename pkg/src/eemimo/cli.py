"""Command-line entry point: ``eemimo solve | sweep | selftest``.

Exit status is 0 on success, 1 for invalid input (bad files, configs or
arguments) and 2 when a numerical routine fails.
"""
import argparse
import logging
import sys
import time

import numpy as np

from . import kernels
from .channel import load_channels
from .errors import NumericError, ValidationError
from .experiment import (SCHEMES, ExperimentConfig, load_config,
                         report_to_json, run_sweep, solve_single, sweep_to_csv)

log = logging.getLogger('eemimo')

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def _write(text, path):
    if path in (None, '-'):
        sys.stdout.write(text)
    else:
        with open(path, 'w') as fh:
            fh.write(text)


def cmd_solve(args):
    H = load_channels(args.channel)
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    report = solve_single(H, cfg, args.scheme)
    _write(report_to_json(report) + '\n', args.out)
    return EXIT_OK


def cmd_sweep(args):
    cfg = load_config(args.config)
    start = time.perf_counter()

    def progress(idx, t):
        log.info('point %d/%d, trial %d/%d', idx + 1,
                 max(len(cfg.sweep_values), 1), t + 1, cfg.trials)

    rows = run_sweep(cfg, progress=progress)
    _write(sweep_to_csv(rows), args.out)
    log.info('sweep finished in %.1f s', time.perf_counter() - start)
    return EXIT_OK


def _selftest_checks():
    from .capacity import effective_channel, mac_sum_rate
    from .channel import generate_channels
    from .numerics import hermitian_eig, logdet_psd
    from .power import PowerModel
    from .solver import (ee_iterative_waterfilling, min_power_for_rate,
                         se_iterative_waterfilling)

    rng = np.random.default_rng(7)
    model = PowerModel()

    def eig_reconstruction():
        B = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        A = B @ B.conj().T
        w, U = hermitian_eig(A)
        return np.linalg.norm(U @ np.diag(w) @ U.conj().T - A) <= 1e-10 * np.linalg.norm(A)

    def logdet_diag():
        return abs(logdet_psd(np.diag([2.0, 4.0])) - 3.0) < 1e-12

    def rate_decomposition():
        H = generate_channels(3, 3, 2, 3, 0.5)
        B = rng.standard_normal((3, 2, 2)) + 1j * rng.standard_normal((3, 2, 2))
        Q = B @ B.conj().transpose(0, 2, 1)
        eff = effective_channel(H, Q, 1, model)
        G = eff.G
        part = H.W * logdet_psd(np.eye(H.M) + G.conj().T @ Q[1] @ G)
        full = mac_sum_rate(H, Q)
        return abs(eff.b + part - full) <= 1e-8 * full

    def p1_grid():
        H = generate_channels(11, 2, 1, 1, 1.0)
        sol = ee_iterative_waterfilling(H, model)
        g = float(np.sum(np.abs(H.H[0]) ** 2)) / H.sigma2
        q = np.geomspace(1e-4, 1e4, 2000)
        ee = H.W * np.log2(1 + q * g) / (q / model.eta + model.circuit_power(2))
        return abs(sol.ee - ee.max()) <= 1e-3 * sol.ee and sol.ee >= ee.max() * (1 - 1e-9)

    def p2_budget():
        H = generate_channels(5, 4, 2, 3, 1.0)
        r = se_iterative_waterfilling(H, model.p_max)
        return abs(r.sum_power - model.p_max) <= 1e-9 * model.p_max and r.converged

    def p3_scalar():
        H = generate_channels(2, 1, 1, 1, 1.0)
        g = abs(H.H[0, 0, 0]) ** 2
        c = 4.0 * H.W
        exact = H.sigma2 * (2 ** (c / H.W) - 1) / g
        r = min_power_for_rate(H, c)
        return abs(r.sum_power - exact) <= 1e-6 * exact

    def backend_agreement():
        d = np.array([3.0, 1.5, 0.2])
        lam_np = kernels._ee_root_numpy(d, 2.0, 0.5, 1.0, 0.4, 0.25, 10.0, 1e-12, 400)[0]
        lam_lp = kernels._ee_root_loop(d, 2.0, 0.5, 1.0, 0.4, 0.25, 10.0, 1e-12, 400)[0]
        return abs(lam_np - lam_lp) <= 1e-10 * lam_np

    return [
        ('hermitian eigendecomposition reconstructs input', eig_reconstruction),
        ('log-determinant of diag(2,4) is 3 bits', logdet_diag),
        ('per-user rate decomposition matches MAC sum rate', rate_decomposition),
        ('single-user EE matches 2000-point grid', p1_grid),
        ('sum-rate water-filling spends exact budget', p2_budget),
        ('minimum power matches scalar closed form', p3_scalar),
        (f'numba and numpy kernels agree (active: {kernels.BACKEND})', backend_agreement),
    ]


def cmd_selftest(args):
    failed = 0
    for name, check in _selftest_checks():
        try:
            ok = bool(check())
        except Exception as exc:  # report and keep going
            ok = False
            name = f'{name} ({type(exc).__name__}: {exc})'
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}")
    return EXIT_OK if not failed else EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(
        prog='eemimo',
        description='Energy-efficient MIMO broadcast: covariance optimisation '
                    'and antenna selection.')
    p.add_argument('-v', '--verbose', action='store_true', help='log progress')
    sub = p.add_subparsers(dest='command', required=True)

    s = sub.add_parser('solve', help='optimise one channel realisation')
    s.add_argument('--channel', required=True, help='channel JSON file')
    s.add_argument('--config', help='experiment INI file (power model, C_min)')
    s.add_argument('--scheme', default='ee-wo-as', choices=SCHEMES)
    s.add_argument('--out', help='output JSON file (default: stdout)')
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser('sweep', help='run a Monte-Carlo sweep')
    s.add_argument('--config', required=True, help='experiment INI file')
    s.add_argument('--out', help='output CSV file (default: stdout)')
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser('selftest', help='run quick built-in consistency checks')
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses status 2 for usage errors; those are invalid input here
        return EXIT_INVALID if exc.code == 2 else exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_INVALID
    except NumericError as exc:
        print(f'numeric failure: {exc}', file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
