# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

Experiments: a configuration, a data stream, one learner run through the online
protocol, and the requested checks.

"""

import json
import logging
import os
from collections import OrderedDict

from .bayes import GaussianExpert
from .bounds import verify_cor1, verify_cor2, verify_cor5, verify_cor5_tuned, verify_det_bound, \
    verify_det_identity, verify_inverse_monotone, verify_kernel_det_bound, verify_kernel_det_identity, \
    verify_mixture_identity, verify_sigma_invariance, verify_thm1, verify_thm2, verify_thm2_bound, verify_thm3, \
    verify_thm4, verify_trend_cor3
from .exceptions import ConfigError, OnlineRidgeError, with_context
from .kernels import DEFAULT_MAX_STEPS, DEFAULT_REFACTOR_EVERY, KernelSpec, run_kernel
from .ridge import run_ridge
from .streams import SyntheticSpec, generate_synthetic, load_csv, load_kernel_csv, make_rng, \
    write_step_log, write_stream_csv

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

ALGOS = ('ridge', 'vaw', 'brr', 'krr', 'kbrr')
KERNEL_ALGOS = ('krr', 'kbrr')
SIGMA_ALGOS = ('brr', 'kbrr')

MIXTURE_EXPERTS = 5

# Which configuration fields each check needs
CHECK_NEEDS = OrderedDict([
    ('thm1', ()),
    ('det_identity', ()),
    ('det_bound', ()),
    ('cor1', ('clip_y',)),
    ('cor2', ()),
    ('inverse_monotone', ()),
    ('sigma_invariance', ()),
    ('cor3_trend', ()),
    ('thm2', ('sigma',)),
    ('thm2_bound', ('sigma',)),
    ('mixture_identity', ('sigma',)),
    ('thm3', ('kernel',)),
    ('thm4', ('kernel', 'sigma')),
    ('cor5', ('kernel', 'clip_y')),
    ('cor5_tuned', ('kernel', 'clip_y')),
    ('kernel_det_identity', ('kernel',)),
    ('kernel_det_bound', ('kernel',)),
])

KERNEL_CHECKS = ('thm3', 'thm4', 'cor5', 'cor5_tuned', 'kernel_det_identity', 'kernel_det_bound')
C_F_CHECKS = ('cor5_tuned', 'kernel_det_bound')


def _mixture_identity(stream, cfg):
    rng = make_rng(cfg.seed)
    experts = [GaussianExpert(rng.standard_normal(stream.dim), cfg.sigma) for _ in range(MIXTURE_EXPERTS)]
    return verify_mixture_identity(experts, stream)


def _kernel_options(cfg):
    return dict(refactor_every=cfg.refactor_every, max_steps=cfg.max_steps)


CHECKS = {
    'thm1': lambda stream, cfg: verify_thm1(stream, cfg.a),
    'det_identity': lambda stream, cfg: verify_det_identity(stream, cfg.a),
    'det_bound': lambda stream, cfg: verify_det_bound(stream, cfg.a, x_inf=cfg.x_inf),
    'cor1': lambda stream, cfg: verify_cor1(stream, cfg.a, cfg.clip_y),
    'cor2': lambda stream, cfg: verify_cor2(stream, cfg.a, z=cfg.z),
    'inverse_monotone': lambda stream, cfg: verify_inverse_monotone(stream, cfg.a, probes=cfg.probes,
                                                                    seed=cfg.seed),
    'sigma_invariance': lambda stream, cfg: verify_sigma_invariance(stream, cfg.a),
    'cor3_trend': lambda stream, cfg: verify_trend_cor3(stream, cfg.a),
    'thm2': lambda stream, cfg: verify_thm2(stream, cfg.a, cfg.sigma),
    'thm2_bound': lambda stream, cfg: verify_thm2_bound(stream, cfg.a, cfg.sigma, x_inf=cfg.x_inf),
    'mixture_identity': _mixture_identity,
    'thm3': lambda stream, cfg: verify_thm3(stream, cfg.kernel, cfg.a, **_kernel_options(cfg)),
    'thm4': lambda stream, cfg: verify_thm4(stream, cfg.kernel, cfg.a, cfg.sigma,
                                            **_kernel_options(cfg)),
    'cor5': lambda stream, cfg: verify_cor5(stream, cfg.kernel, cfg.a, cfg.clip_y,
                                            **_kernel_options(cfg)),
    'cor5_tuned': lambda stream, cfg: verify_cor5_tuned(stream, cfg.kernel, cfg.clip_y, c_f=cfg.c_f,
                                                        **_kernel_options(cfg)),
    'kernel_det_identity': lambda stream, cfg: verify_kernel_det_identity(stream, cfg.kernel, cfg.a,
                                                                          **_kernel_options(cfg)),
    'kernel_det_bound': lambda stream, cfg: verify_kernel_det_bound(stream, cfg.kernel, cfg.a, c_f=cfg.c_f,
                                                                   **_kernel_options(cfg)),
}


def _split_checks(checks):
    if checks is None:
        return []
    if isinstance(checks, str):
        checks = checks.split(',')
    return [c.strip() for c in checks if c.strip()]


class ExperimentConfig(object):
    """Everything needed to run one experiment

    Exactly one of data (a CSV path), synthetic (a SyntheticSpec or its inline
    string) or kernel_data (a precomputed kernel CSV path) gives the stream.
    """

    def __init__(self, algo, a, sigma=None, kernel=None, clip_y=None, data=None, synthetic=None,
                 kernel_data=None, checks=None, seed=0, report_path=None, steps_path=None,
                 x_inf=None, z=None, c_f=None, probes=1000, refactor_every=DEFAULT_REFACTOR_EVERY,
                 max_steps=DEFAULT_MAX_STEPS, save_stream=None):

        self.algo = algo
        self.a = a
        self.sigma = sigma
        self.clip_y = clip_y
        self.c_f = c_f

        if isinstance(kernel, str):
            kernel = KernelSpec.parse(kernel, c_f=c_f)

        self.kernel = kernel

        if isinstance(synthetic, str):
            synthetic = SyntheticSpec.parse(synthetic)

        self.data = data
        self.synthetic = synthetic
        self.kernel_data = kernel_data
        self.checks = _split_checks(checks)
        self.seed = seed
        self.report_path = report_path
        self.steps_path = steps_path
        self.x_inf = x_inf
        self.z = z
        self.probes = probes
        self.refactor_every = refactor_every
        self.max_steps = max_steps
        self.save_stream = save_stream

    @classmethod
    def from_args(cls, args, a=None):
        """Build a config from the CLI's argparse namespace"""

        return cls(
            algo=args.algo,
            a=a if a is not None else args.a,
            sigma=args.sigma,
            kernel=args.kernel,
            clip_y=args.clip,
            data=args.data,
            synthetic=args.synthetic,
            kernel_data=args.kernel_data,
            checks=args.checks,
            seed=args.seed,
            report_path=args.report,
            steps_path=args.steps,
            x_inf=args.x_inf,
            z=args.z,
            c_f=args.c_f,
            probes=args.probes,
            refactor_every=args.refactor_every,
            max_steps=args.max_steps,
            save_stream=args.save_stream,
        )

    def validate(self):
        """Raise ConfigError for anything that would fail later"""

        if self.algo not in ALGOS:
            raise ConfigError("Unknown algorithm '{}'; expected one of {}".format(self.algo, ', '.join(ALGOS)))

        if self.a is None or not self.a > 0:
            raise ConfigError('a must be positive, got {}'.format(self.a))

        if (self.kernel is not None) != (self.algo in KERNEL_ALGOS):
            raise ConfigError("A kernel is required for, and only for, algorithms {}; algo is '{}'"
                              .format(', '.join(KERNEL_ALGOS), self.algo))

        if (self.sigma is not None) != (self.algo in SIGMA_ALGOS):
            raise ConfigError("sigma is required for, and only for, algorithms {}; algo is '{}'"
                              .format(', '.join(SIGMA_ALGOS), self.algo))

        if self.sigma is not None and not self.sigma > 0:
            raise ConfigError('sigma must be positive, got {}'.format(self.sigma))

        if self.clip_y is not None and not self.clip_y > 0:
            raise ConfigError('The clipping bound must be positive, got {}'.format(self.clip_y))

        sources = [s for s in (self.data, self.synthetic, self.kernel_data) if s is not None]
        if len(sources) != 1:
            raise ConfigError('Exactly one of data, synthetic or kernel_data is required, got {}'.format(len(sources)))

        precomputed = self.kernel is not None and self.kernel.kind == 'precomputed'

        if precomputed != (self.kernel_data is not None):
            raise ConfigError('A precomputed kernel goes with, and only with, precomputed kernel data')

        for name in self.checks:
            if name not in CHECK_NEEDS:
                raise ConfigError("Unknown check '{}'; expected one of {}".format(name, ', '.join(CHECK_NEEDS)))

            for field in CHECK_NEEDS[name]:
                if getattr(self, field) is None:
                    raise ConfigError("Check '{}' needs '{}'".format(name, field))

            if name in C_F_CHECKS and self.c_f is None and self.kernel.c_f is None:
                raise ConfigError("Check '{}' needs c_F for kernel '{}'".format(name, self.kernel))

            if precomputed and name not in KERNEL_CHECKS:
                raise ConfigError("Check '{}' needs input vectors, not precomputed kernel values".format(name))

        runs_kernel = self.algo in KERNEL_ALGOS or any(c in KERNEL_CHECKS for c in self.checks)

        if self.refactor_every is not None and self.refactor_every < 1:
            raise ConfigError('refactor_every must be positive, got {}'.format(self.refactor_every))

        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError('max_steps must be positive, got {}'.format(self.max_steps))

        if runs_kernel and self.synthetic is not None and self.max_steps is not None \
                and self.synthetic.T > self.max_steps:
            raise ConfigError('Synthetic stream has T={} steps, more than the kernel model limit of {}'
                              .format(self.synthetic.T, self.max_steps))

        if self.save_stream and self.kernel_data is not None:
            raise ConfigError("Can't save a precomputed kernel stream")

        return self

    @property
    def steps_file(self):
        if self.steps_path:
            return self.steps_path

        if self.report_path:
            return os.path.splitext(self.report_path)[0] + '.steps.csv'

        return None

    @property
    def dict(self):
        return OrderedDict([
            ('algo', self.algo),
            ('a', self.a),
            ('sigma', self.sigma),
            ('kernel', str(self.kernel) if self.kernel is not None else None),
            ('clip_y', self.clip_y),
            ('data', self.data),
            ('synthetic', str(self.synthetic) if self.synthetic is not None else None),
            ('kernel_data', self.kernel_data),
            ('checks', list(self.checks)),
            ('seed', self.seed),
            ('x_inf', self.x_inf),
            ('z', self.z),
            ('c_f', self.c_f),
            ('probes', self.probes),
            ('refactor_every', self.refactor_every),
            ('max_steps', self.max_steps),
        ])


def load_stream(cfg):
    """Load or generate the stream an experiment runs on"""

    if cfg.data is not None:
        stream = load_csv(cfg.data)
    elif cfg.kernel_data is not None:
        stream = load_kernel_csv(cfg.kernel_data)
    else:
        stream = generate_synthetic(cfg.synthetic, cfg.seed)

    if cfg.save_stream:
        write_stream_csv(stream, cfg.save_stream)
        logger.info("Wrote stream to '{}'".format(cfg.save_stream))

    return stream


def run_protocol(cfg, stream):
    """Run the configured learner over the stream. Returns the step records"""

    if cfg.algo in KERNEL_ALGOS:
        sigma = cfg.sigma if cfg.algo == 'kbrr' else None
        _, records = run_kernel(stream, cfg.kernel, cfg.a, clip_y=cfg.clip_y, sigma=sigma,
                                refactor_every=cfg.refactor_every, max_steps=cfg.max_steps)
    else:
        sigma = cfg.sigma if cfg.algo == 'brr' else None
        _, records = run_ridge(stream, cfg.a, clip_y=cfg.clip_y, sigma=sigma, vaw=cfg.algo == 'vaw')

    return records


def run_checks(cfg, stream):
    reports = []

    for name in cfg.checks:
        try:
            reports.append(CHECKS[name](stream, cfg))
        except OnlineRidgeError as e:
            raise with_context(e, 'check {}'.format(name))

    return reports


def write_report(cfg, reports, path):

    doc = OrderedDict([
        ('schema_version', SCHEMA_VERSION),
        ('config', cfg.dict),
        ('reports', [r.dict for r in reports]),
        ('steps_path', cfg.steps_file),
    ])

    with open(path, 'w') as f:
        json.dump(doc, f, indent=2, default=float)


def run_experiment(cfg):
    """Run one experiment. Returns (records, reports)

    Writes the step log and the JSON report when the config has a report path.
    """

    cfg.validate()

    stream = load_stream(cfg)

    logger.info('Running {} with a={} on {} steps'.format(cfg.algo, cfg.a, len(stream)))

    records = run_protocol(cfg, stream)
    reports = run_checks(cfg, stream)

    if cfg.steps_file:
        write_step_log(records, cfg.steps_file)

    if cfg.report_path:
        write_report(cfg, reports, cfg.report_path)
        logger.info("Wrote report to '{}'".format(cfg.report_path))

    return records, reports


def exit_code(reports):
    """0 if every asserted check passed, 1 otherwise. Informational reports don't count"""
    return 0 if all(r.passed is not False for r in reports) else 1


def _run_reports(cfg):
    return run_experiment(cfg)[1]


def run_grid(configs, max_workers=None):
    """Run independent experiments in a process pool. Returns the report lists, in order"""
    from concurrent.futures import ProcessPoolExecutor

    configs = [cfg.validate() for cfg in configs]

    with ProcessPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(_run_reports, configs))
