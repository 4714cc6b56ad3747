# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

Computing both sides of the loss equalities and bounds

Each verify_* function runs an online learner over the stream for the left hand
side and computes the right hand side in batch, by factorization, so the two
sides never share a code path. The result is a BoundReport.

Equalities pass when |lhs - rhs| <= tolerance * max(1, |rhs|); upper bounds pass
when lhs <= rhs + tolerance. Informational reports have no pass/fail.

"""

import logging
import math
from collections import OrderedDict

import numpy as np

from .bayes import LOG_2PI, brr_cumulative_log_loss, expert_cumulative_log_loss, finite_ba_loss_identity, \
    finite_ba_new, finite_ba_step
from .exceptions import InputError, ParamError
from .kernels import gram, log_det_kernel, representer_coefficients, rkhs_min_value_gram, run_kernel, tuned_a
from .linalg import batch_ridge, log_det_gram
from .ridge import ridge_new, ridge_update, run_ridge
from .streams import as_stream, make_rng

logger = logging.getLogger(__name__)

EQUALITY_TOL = 1e-6
INEQUALITY_TOL = 1e-7
MONOTONE_TOL = 1e-12
MIXTURE_TOL = 1e-9
SIGMA_TOL = 1e-10


class BoundReport(object):
    """Both sides of one guarantee, evaluated on one stream"""

    EQUALITY = 'equality'
    UPPER_BOUND = 'upper_bound'
    INFORMATIONAL = 'informational'

    def __init__(self, name, lhs, rhs, relation, tolerance=None, meta=None, detail=None):

        if relation not in (self.EQUALITY, self.UPPER_BOUND, self.INFORMATIONAL):
            raise ParamError("Unknown relation '{}'".format(relation))

        if tolerance is None:
            tolerance = EQUALITY_TOL if relation == self.EQUALITY else INEQUALITY_TOL

        self.name = name
        self.lhs = float(lhs) if lhs is not None else None
        self.rhs = float(rhs) if rhs is not None else None
        self.relation = relation
        self.tolerance = tolerance
        self.meta = OrderedDict(meta or {})
        self.detail = OrderedDict(detail or {})

    @property
    def informational(self):
        return self.relation == self.INFORMATIONAL

    @property
    def gap(self):
        if self.lhs is None or self.rhs is None:
            return None
        if self.relation == self.EQUALITY:
            return abs(self.lhs - self.rhs)
        return self.rhs - self.lhs

    @property
    def passed(self):
        """True or False for asserted checks, None for informational ones"""

        if self.informational:
            return None

        if self.relation == self.EQUALITY:
            return self.gap <= self.tolerance * max(1.0, abs(self.rhs))

        return self.lhs <= self.rhs + self.tolerance

    @property
    def dict(self):
        return OrderedDict([
            ('name', self.name),
            ('lhs', self.lhs),
            ('rhs', self.rhs),
            ('gap', self.gap),
            ('relation', self.relation),
            ('tolerance', self.tolerance),
            ('pass', self.passed),
            ('meta', dict(self.meta)),
            ('detail', dict(self.detail)),
        ])

    def __str__(self):
        return format_reports([self])

    def __repr__(self):
        return '<BoundReport {} lhs={} rhs={} pass={}>'.format(self.name, self.lhs, self.rhs, self.passed)


def format_reports(reports):
    """A pipe table of reports, for printing"""
    from tabulate import tabulate

    rows = []
    for r in reports:
        passed = {True: 'pass', False: 'FAIL', None: 'info'}[r.passed]
        rows.append([r.name, r.relation, r.lhs, r.rhs, r.gap, r.tolerance, passed])

    return tabulate(rows, ['check', 'relation', 'lhs', 'rhs', 'gap', 'tol', 'result'],
                    tablefmt='pipe', floatfmt='.10g')


def _meta(stream, **kwargs):
    d = OrderedDict([('T', len(stream))])

    if getattr(stream, 'dim', None) is not None:
        d['n'] = stream.dim

    for k, v in kwargs.items():
        if v is not None:
            d[k] = str(v) if k == 'kernel' else v

    return d


def _report(*args, **kwargs):
    r = BoundReport(*args, **kwargs)

    if r.passed is False:
        logger.warning('{} FAILED: lhs={!r} rhs={!r} gap={!r}'.format(r.name, r.lhs, r.rhs, r.gap))
    else:
        logger.info('{}: lhs={!r} rhs={!r} gap={!r}'.format(r.name, r.lhs, r.rhs, r.gap))

    return r


def _check_bounded_outcomes(stream, bound_y):

    if bound_y is None or not bound_y > 0:
        raise ParamError('The outcome bound Y must be positive, got {}'.format(bound_y))

    if stream.max_abs_y > bound_y:
        raise InputError('Outcome of size {} exceeds the bound Y = {}'.format(stream.max_abs_y, bound_y))


def _batch_min(stream, a):
    return batch_ridge(stream.xs, stream.ys, a, dim=stream.dim)


def verify_thm1(stream, a):
    """sum (y - gamma)^2 / (1 + q) of the online run = the batch ridge minimum"""

    stream = as_stream(stream)
    s, _ = run_ridge(stream, a)
    _, min_value = _batch_min(stream, a)

    return _report('thm1', s.weighted_loss_acc, min_value, BoundReport.EQUALITY, meta=_meta(stream, a=a))


def verify_det_identity(stream, a):
    """sum ln(1 + q_t) of the online run = ln det(I + X'X/a) by factorization"""

    stream = as_stream(stream)
    s, _ = run_ridge(stream, a)

    return _report('det_identity', s.log_det_acc, log_det_gram(stream.xs, a, dim=stream.dim),
                   BoundReport.EQUALITY, meta=_meta(stream, a=a))


def verify_cor1(stream, a, bound_y):
    """Clipped square loss <= batch minimum + 4Y^2 ln det(I + X'X/a)"""

    stream = as_stream(stream)
    _check_bounded_outcomes(stream, bound_y)

    s, _ = run_ridge(stream, a, clip_y=bound_y)
    _, min_value = _batch_min(stream, a)
    log_det = log_det_gram(stream.xs, a, dim=stream.dim)

    return _report('cor1', s.clipped_loss_acc, min_value + 4 * bound_y ** 2 * log_det, BoundReport.UPPER_BOUND,
                   meta=_meta(stream, a=a, Y=bound_y),
                   detail=[('batch_min', min_value), ('log_det', log_det)])


def _x_inf(stream, x_inf):

    if x_inf is None:
        return stream.max_norm_inf

    if stream.max_norm_inf > x_inf:
        raise InputError('Input of sup norm {} exceeds the bound X = {}'.format(stream.max_norm_inf, x_inf))

    return x_inf


def verify_det_bound(stream, a, x_inf=None):
    """ln det(I + X'X/a) <= n ln(1 + T X^2/a). X defaults to the largest |x_ti| in the stream"""

    stream = as_stream(stream)
    x_inf = _x_inf(stream, x_inf)

    s, _ = run_ridge(stream, a)
    rhs = stream.dim * math.log1p(len(stream) * x_inf ** 2 / a)

    return _report('det_bound', s.log_det_acc, rhs, BoundReport.UPPER_BOUND, meta=_meta(stream, a=a, X=x_inf))


def verify_cor2(stream, a, z=None):
    """Plain square loss <= (1 + Z^2/a) times the batch minimum, for |x_t|_2 <= Z"""

    stream = as_stream(stream)

    if z is None:
        z = stream.max_norm_2
    elif stream.max_norm_2 > z * (1 + 1e-12):
        raise InputError('Input of norm {} exceeds the bound Z = {}'.format(stream.max_norm_2, z))

    s, _ = run_ridge(stream, a)
    _, min_value = _batch_min(stream, a)

    return _report('cor2', s.plain_loss_acc, (1 + z ** 2 / a) * min_value, BoundReport.UPPER_BOUND,
                   meta=_meta(stream, a=a, Z=z))


def _regularized_expert_min(stream, a, sigma):
    """min over theta of L_T(theta) + a/(2 sigma^2) |theta|^2, at the batch ridge solution"""

    theta, _ = _batch_min(stream, a)

    return expert_cumulative_log_loss(stream.xs, stream.ys, theta, sigma) + a * theta.dot(theta) / (2 * sigma ** 2)


def verify_thm2(stream, a, sigma):
    """Cumulative log loss of Bayesian Ridge Regression = regularized best expert + (1/2) ln det"""

    stream = as_stream(stream)
    s, records = run_ridge(stream, a, sigma=sigma)

    lhs = brr_cumulative_log_loss(records, sigma)
    rhs = _regularized_expert_min(stream, a, sigma) + 0.5 * log_det_gram(stream.xs, a, dim=stream.dim)

    return _report('thm2', lhs, rhs, BoundReport.EQUALITY, meta=_meta(stream, a=a, sigma=sigma),
                   detail=[('stepwise_log_loss', s.log_loss_acc),
                           ('stepwise_gap', abs(s.log_loss_acc - lhs))])


def verify_thm2_bound(stream, a, sigma, x_inf=None):
    """Cumulative log loss <= regularized best expert + (n/2) ln(1 + T X^2/a)"""

    stream = as_stream(stream)
    x_inf = _x_inf(stream, x_inf)

    _, records = run_ridge(stream, a, sigma=sigma)

    lhs = brr_cumulative_log_loss(records, sigma)
    rhs = _regularized_expert_min(stream, a, sigma) + stream.dim / 2.0 * math.log1p(len(stream) * x_inf ** 2 / a)

    return _report('thm2_bound', lhs, rhs, BoundReport.UPPER_BOUND, meta=_meta(stream, a=a, sigma=sigma, X=x_inf))


def verify_sigma_invariance(stream, a, sigmas=(0.1, 1.0, 10.0)):
    """The weighted loss identity gap does not move with sigma; Ridge Regression never reads sigma"""

    stream = as_stream(stream)
    _, min_value = _batch_min(stream, a)

    gaps = []
    for sigma in sigmas:
        s, _ = run_ridge(stream, a, sigma=sigma)
        gaps.append(abs(s.weighted_loss_acc - min_value))

    spread = max(gaps) - min(gaps)

    return _report('sigma_invariance', spread, 0.0, BoundReport.UPPER_BOUND, tolerance=SIGMA_TOL,
                   meta=_meta(stream, a=a), detail=[('sigmas', list(sigmas)), ('gaps', gaps)])


def verify_inverse_monotone(stream, a, probes=1000, seed=0):
    """v'A_j^-1 v <= v'A_i^-1 v for i <= j, for random unit probes v

    lhs is the largest violation found, v'A_j^-1 v - v'A_i^-1 v, checked against 0
    """

    stream = as_stream(stream)

    s = ridge_new(a, stream.dim)
    inverses = [s.a_inv]
    for x, y in stream:
        s, _ = ridge_update(s, x, y)
        inverses.append(s.a_inv)

    rng = make_rng(seed)
    worst = -np.inf

    for _ in range(probes):
        v = rng.standard_normal(stream.dim)
        v /= np.linalg.norm(v)
        i, j = sorted(rng.integers(0, len(inverses), size=2))

        worst = max(worst, float(v.dot(inverses[j]).dot(v) - v.dot(inverses[i]).dot(v)))

    if not probes:
        worst = 0.0

    return _report('inverse_monotone', worst, 0.0, BoundReport.UPPER_BOUND, tolerance=MONOTONE_TOL,
                   meta=_meta(stream, a=a), detail=[('probes', probes), ('seed', seed)])


def verify_mixture_identity(experts, stream, prior=None):
    """Cumulative loss of the finite Bayesian mixture = -ln sum prior e^{-L_T(theta)}"""

    stream = as_stream(stream)
    s = finite_ba_new(experts, prior)

    for x, y in stream:
        s = finite_ba_step(s, [e.predict(x) for e in s.experts], y)

    lhs, rhs = finite_ba_loss_identity(s)

    return _report('mixture_identity', lhs, rhs, BoundReport.EQUALITY, tolerance=MIXTURE_TOL,
                   meta=_meta(stream, experts=len(s.experts)))


def verify_trend_cor3(stream, a, tail_fraction=0.1):
    """The q_t sequence and its largest value over the final tail of the stream

    Also reports the ratio of the plain square loss to the batch minimum. Both
    are limits as T grows, so the report is informational only.
    """

    stream = as_stream(stream)
    s, records = run_ridge(stream, a)
    qs = [r.q for r in records]

    tail = qs[-max(1, int(math.ceil(tail_fraction * len(qs)))):] if qs else []
    tail_max = max(tail) if tail else 0.0

    _, min_value = _batch_min(stream, a)
    ratio = s.plain_loss_acc / min_value if min_value > 0 else None

    return _report('cor3_trend', tail_max, None, BoundReport.INFORMATIONAL, meta=_meta(stream, a=a),
                   detail=[('tail_fraction', tail_fraction), ('loss_ratio', ratio), ('qs', qs)])


def _kernel_run(stream, spec, a, **kwargs):

    if not hasattr(stream, 'gram'):
        stream = as_stream(stream)

    m, records = run_kernel(stream, spec, a, **kwargs)

    return stream, m, records, gram(stream, spec), np.asarray(stream.ys, dtype=float)


def verify_thm3(stream, spec, a, **options):
    """Kernelized weighted square loss = a Y'(aI + K)^-1 Y, the minimum over the RKHS"""

    stream, m, _, K, ys = _kernel_run(stream, spec, a, **options)

    return _report('thm3', m.weighted_loss_acc, rkhs_min_value_gram(K, ys, a), BoundReport.EQUALITY,
                   meta=_meta(stream, a=a, kernel=spec), detail=[('max_drift', m.max_drift)])


def verify_thm4(stream, spec, a, sigma, **options):
    """Kernelized Bayesian Ridge Regression log loss = regularized best RKHS expert + (1/2) ln det(I + K/a)"""

    stream, m, _, K, ys = _kernel_run(stream, spec, a, sigma=sigma, **options)

    T = len(ys)
    expert_min = 0.5 * T * (LOG_2PI + 2 * math.log(sigma)) + rkhs_min_value_gram(K, ys, a) / (2 * sigma ** 2)

    return _report('thm4', m.log_loss_acc, expert_min + 0.5 * log_det_kernel(K, a), BoundReport.EQUALITY,
                   meta=_meta(stream, a=a, sigma=sigma, kernel=spec), detail=[('max_drift', m.max_drift)])


def verify_cor5(stream, spec, a, bound_y, **options):
    """Clipped kernelized square loss <= RKHS minimum + 4Y^2 ln det(I + K/a)"""

    if not hasattr(stream, 'gram'):
        stream = as_stream(stream)

    _check_bounded_outcomes(stream, bound_y)

    stream, m, _, K, ys = _kernel_run(stream, spec, a, clip_y=bound_y, **options)

    min_value = rkhs_min_value_gram(K, ys, a)
    log_det = log_det_kernel(K, a)

    return _report('cor5', m.clipped_loss_acc, min_value + 4 * bound_y ** 2 * log_det, BoundReport.UPPER_BOUND,
                   meta=_meta(stream, a=a, Y=bound_y, kernel=spec),
                   detail=[('rkhs_min', min_value), ('log_det', log_det)])


def verify_kernel_det_identity(stream, spec, a, **options):
    """sum ln(1 + d_t) of the online run = ln det(I + K/a) by factorization"""

    stream, m, _, K, _ = _kernel_run(stream, spec, a, **options)

    return _report('kernel_det_identity', m.log_det_acc, log_det_kernel(K, a), BoundReport.EQUALITY,
                   meta=_meta(stream, a=a, kernel=spec), detail=[('max_drift', m.max_drift)])


def _c_f(spec, c_f):
    c_f = c_f if c_f is not None else spec.c_f

    if c_f is None:
        raise ParamError("Kernel '{}' has no bounded diagonal; supply c_F explicitly".format(spec))

    return c_f


def verify_kernel_det_bound(stream, spec, a, c_f=None, **options):
    """ln det(I + K/a) <= T ln(1 + c_F^2/a), where c_F^2 bounds K(x, x)"""

    c_f = _c_f(spec, c_f)
    stream, m, _, K, _ = _kernel_run(stream, spec, a, **options)

    if K.size and np.max(np.diag(K)) > c_f ** 2 * (1 + 1e-12):
        raise InputError('K(x, x) = {} exceeds c_F^2 = {}'.format(np.max(np.diag(K)), c_f ** 2))

    return _report('kernel_det_bound', m.log_det_acc, len(stream) * math.log1p(c_f ** 2 / a),
                   BoundReport.UPPER_BOUND, meta=_meta(stream, a=a, kernel=spec, c_f=c_f))


def verify_cor5_tuned(stream, spec, bound_y, c_f=None, **options):
    """With a = c_F sqrt(T), the clipped loss <= sum (y - f(x))^2 + c_F(|f|^2 + 4Y^2) sqrt(T)

    The comparator f is the representer solution for the same a.
    """

    if not hasattr(stream, 'gram'):
        stream = as_stream(stream)

    _check_bounded_outcomes(stream, bound_y)
    c_f = _c_f(spec, c_f)
    T = len(stream)

    if T == 0:
        return _report('cor5_tuned', 0.0, 0.0, BoundReport.UPPER_BOUND, meta=_meta(stream, kernel=spec, Y=bound_y))

    a = tuned_a(c_f, T)
    stream, m, _, K, ys = _kernel_run(stream, spec, a, clip_y=bound_y, **options)

    c = representer_coefficients(K, ys, a)
    resid = ys - K.dot(c)
    norm_sq = float(c.dot(K.dot(c)))

    rhs = float(resid.dot(resid)) + c_f * (norm_sq + 4 * bound_y ** 2) * math.sqrt(T)

    return _report('cor5_tuned', m.clipped_loss_acc, rhs, BoundReport.UPPER_BOUND,
                   meta=_meta(stream, a=a, kernel=spec, Y=bound_y, c_f=c_f),
                   detail=[('f_norm_sq', norm_sq)])
