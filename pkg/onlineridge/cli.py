# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

CLI program

Runs one learner over a stream, runs the requested checks, and prints a report.
Exits with 0 when every check passed, 1 when a check failed and 2 on an error.

"""

from __future__ import print_function

import logging
import os
import sys

logger = logging.getLogger(__name__)

EXIT_ERROR = 2


def _a_values(s):
    from .exceptions import ConfigError

    try:
        values = [float(v) for v in s.split(',') if v.strip()]
    except ValueError:
        raise ConfigError("Can't parse ridge parameter list '{}'".format(s))

    if not values:
        raise ConfigError('--a needs at least one ridge parameter value')

    if len(set(values)) != len(values):
        raise ConfigError("Ridge parameter list '{}' repeats a value".format(s))

    return values


def _grid_report_path(path, a):
    if path is None:
        return None
    base, ext = os.path.splitext(path)
    return '{}.a={}{}'.format(base, a, ext or '.json')


def make_parser():
    import argparse
    from . import __meta__
    from .experiment import ALGOS, CHECK_NEEDS
    from .kernels import DEFAULT_MAX_STEPS, DEFAULT_REFACTOR_EVERY

    parser = argparse.ArgumentParser(
        prog='ridgebounds',
        description='Run online ridge learners and check their loss bounds. Version {}'
        .format(__meta__.__version__))

    parser.add_argument('--algo', required=True, choices=ALGOS, help='Learner to run')
    parser.add_argument('--a', required=True,
                        help='Ridge parameter. A comma separated list runs a grid, one experiment per value')
    parser.add_argument('--sigma', type=float, help='Noise scale for brr and kbrr')
    parser.add_argument('--kernel', help="Kernel: linear, rbf:gamma=G, poly:degree=P,offset=C or precomputed")
    parser.add_argument('--clip', type=float, help='Clip predictions to [-Y, Y]')

    g = parser.add_mutually_exclusive_group(required=True)
    g.add_argument('--data', help='CSV file with feature columns and a final y column')
    g.add_argument('--kernel-data', help='CSV file of precomputed kernel values')
    g.add_argument('--synthetic', help="Synthetic stream, e.g. 'n=3,T=1000,noise=0.1,x=cube:1'")

    parser.add_argument('--checks', default='',
                        help='Comma separated checks: {}'.format(', '.join(CHECK_NEEDS)))
    parser.add_argument('--seed', type=int, default=0, help='Seed for synthetic data and probes')
    parser.add_argument('--report', help='Write the JSON report here')
    parser.add_argument('--steps', help='Write the step log CSV here')
    parser.add_argument('--save-stream', help='Write the stream, as CSV, here')
    parser.add_argument('--x-inf', type=float, help='Bound on |x_i| for the determinant bounds')
    parser.add_argument('--z', type=float, help='Bound on ||x|| for cor2')
    parser.add_argument('--c-f', type=float, help='Bound on K(x, x) for the kernel bounds')
    parser.add_argument('--probes', type=int, default=1000, help='Probe count for the inverse_monotone check')
    parser.add_argument('--refactor-every', type=int, default=DEFAULT_REFACTOR_EVERY,
                        help='Rebuild the kernel inverse from a factorization every N steps')
    parser.add_argument('--max-steps', type=int, default=DEFAULT_MAX_STEPS,
                        help='Refuse kernel runs longer than this many steps')
    parser.add_argument('--stats', default=False, action='store_true', help='Print step log statistics')

    v = parser.add_mutually_exclusive_group()
    v.add_argument('-v', '--verbose', default=False, action='store_true', help='Log every step')
    v.add_argument('-q', '--quiet', default=False, action='store_true', help='Only log warnings and errors')

    return parser


def main(argv=None):
    from .bounds import format_reports
    from .exceptions import OnlineRidgeError
    from .experiment import ExperimentConfig, exit_code, run_experiment, run_grid
    from .stats import StepLogStats

    parser = make_parser()
    args = parser.parse_args(sys.argv[1:] if argv is None else argv)

    level = logging.DEBUG if args.verbose else (logging.WARNING if args.quiet else logging.INFO)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    try:
        a_values = _a_values(args.a)

        if len(a_values) == 1:
            cfg = ExperimentConfig.from_args(args, a=a_values[0])
            records, reports = run_experiment(cfg)

            if reports:
                print(format_reports(reports))

            if args.stats:
                print(StepLogStats(records).run())

            return exit_code(reports)

        configs = []
        for a in a_values:
            cfg = ExperimentConfig.from_args(args, a=a)
            cfg.report_path = _grid_report_path(args.report, a)
            cfg.steps_path = _grid_report_path(args.steps, a) if args.steps else None
            configs.append(cfg)

        results = run_grid(configs)

        for cfg, reports in zip(configs, results):
            print('a = {}'.format(cfg.a))
            if reports:
                print(format_reports(reports))

        return max(exit_code(reports) for reports in results)

    except (OnlineRidgeError, ValueError, IOError, OSError) as e:
        logger.error(str(e))
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
