# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

Kernels and kernelized Ridge Regression

The kernelized learner predicts gamma = Y'(aI + K)^-1 k for the kernel vector k
of the new input against the stored inputs. The inverse G = (aI + K)^-1 is grown
by one row and column per step with the Schur complement

    s = a + K(x, x) - k'Gk = a (1 + d)

where d is the term in the denominator of the weighted loss. Every refactor_every
steps G is recomputed from a Cholesky factorization of aI + K.

Inputs are real vectors, except for the 'precomputed' kernel, where the caller
supplies k and K(x, x) for each step; see krr_update_values().

"""

import logging
import math
from collections import OrderedDict

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist

from .exceptions import DimensionError, NumericError, OnlineRidgeError, ParamError, with_context
from .linalg import as_vec, log_det_spd, symmetrize
from .ridge import StepRecord, clip

logger = logging.getLogger(__name__)

DEFAULT_REFACTOR_EVERY = 256
DEFAULT_MAX_STEPS = 100000

# d may fall this far below zero, relative to max(1, K(x,x)/a), from roundoff
NEGATIVE_D_TOL = 1e-9

DRIFT_WARNING = 1e-6


class KernelSpec(object):
    """A kernel function and its parameters

        linear:       x'z
        rbf:          exp(-gamma |x - z|^2)
        poly:         (x'z + offset)^degree
        precomputed:  values are supplied by the caller
    """

    KINDS = ('linear', 'rbf', 'poly', 'precomputed')

    aliases = {
        'polynomial': 'poly',
        'gaussian': 'rbf'
    }

    def __init__(self, kind, gamma=None, degree=None, offset=0.0, c_f=None):

        kind = self.aliases.get(kind, kind)

        if kind not in self.KINDS:
            raise ParamError("Unknown kernel '{}'; expected one of {}".format(kind, ', '.join(self.KINDS)))

        self.kind = kind
        self.gamma = None
        self.degree = None
        self.offset = None

        if kind == 'rbf':
            if gamma is None or not gamma > 0:
                raise ParamError('rbf kernel needs gamma > 0, got {}'.format(gamma))
            self.gamma = float(gamma)

        elif kind == 'poly':
            if degree is None or int(degree) != degree or degree < 1:
                raise ParamError('Polynomial kernel needs an integer degree >= 1, got {}'.format(degree))
            if offset is None or not offset >= 0:
                raise ParamError('Polynomial kernel needs offset >= 0, got {}'.format(offset))
            self.degree = int(degree)
            self.offset = float(offset)

        if c_f is not None and not c_f > 0:
            raise ParamError('c_F must be positive, got {}'.format(c_f))

        self._c_f = float(c_f) if c_f is not None else None

    @classmethod
    def parse(cls, s, c_f=None):
        """Parse a kernel string, like 'rbf:gamma=0.5' or 'poly:degree=2,offset=1'"""

        kind, _, params = s.strip().partition(':')

        kwargs = {}
        for part in params.split(','):
            if not part.strip():
                continue

            k, sep, v = part.partition('=')
            if not sep:
                raise ParamError("Bad kernel parameter '{}' in '{}'".format(part, s))

            k = k.strip()
            if k not in ('gamma', 'degree', 'offset'):
                raise ParamError("Unknown kernel parameter '{}' in '{}'".format(k, s))

            try:
                kwargs[k] = int(v) if k == 'degree' else float(v)
            except ValueError:
                raise ParamError("Bad value for kernel parameter '{}' in '{}'".format(k, s))

        return cls(kind.strip().lower(), c_f=c_f, **kwargs)

    @property
    def c_f(self):
        """sup of sqrt(K(x, x)): 1 for rbf, otherwise only what the user supplied"""
        if self._c_f is not None:
            return self._c_f

        if self.kind == 'rbf':
            return 1.0

        return None

    def __call__(self, x, z):
        return kernel_eval(self, x, z)

    def matrix(self, xs, zs=None):
        return kernel_matrix(self, xs, zs)

    @property
    def dict(self):
        d = OrderedDict([('kind', self.kind)])

        if self.kind == 'rbf':
            d['gamma'] = self.gamma
        elif self.kind == 'poly':
            d['degree'] = self.degree
            d['offset'] = self.offset

        return d

    def __str__(self):
        params = ','.join('{}={}'.format(k, v) for k, v in self.dict.items() if k != 'kind')
        return '{}:{}'.format(self.kind, params) if params else self.kind

    def __repr__(self):
        return '<KernelSpec {}>'.format(self)


def kernel_eval(spec, x, z):
    """Evaluate the kernel at a pair of inputs"""

    if spec.kind == 'precomputed':
        raise ParamError('A precomputed kernel has no function to evaluate')

    x = as_vec(x)
    z = as_vec(z)

    if x.size != z.size:
        raise DimensionError('Inputs have different dimensions: {} and {}'.format(x.size, z.size))

    if spec.kind == 'linear':
        v = float(x.dot(z))
    elif spec.kind == 'rbf':
        diff = x - z
        v = math.exp(-spec.gamma * float(diff.dot(diff)))
    else:
        v = (float(x.dot(z)) + spec.offset) ** spec.degree

    if not math.isfinite(v):
        raise NumericError('Kernel value is not finite for {} at {}, {}'.format(spec, x, z))

    return v


def _as_rows(xs):
    X = np.asarray(xs, dtype=float)

    if X.ndim == 1:
        X = X.reshape(-1, 1)

    if X.ndim != 2:
        raise DimensionError('Expected a sequence of input vectors, got shape {}'.format(X.shape))

    return X


def kernel_matrix(spec, xs, zs=None):
    """The matrix of kernel values K(x_i, z_j). With no zs, the Gram matrix of xs"""

    if spec.kind == 'precomputed':
        raise ParamError('A precomputed kernel has no function to evaluate')

    X = _as_rows(xs)
    Z = X if zs is None else _as_rows(zs)

    if X.shape[1] != Z.shape[1]:
        raise DimensionError('Inputs have different dimensions: {} and {}'.format(X.shape[1], Z.shape[1]))

    if spec.kind == 'linear':
        K = X.dot(Z.T)
    elif spec.kind == 'rbf':
        K = np.exp(-spec.gamma * cdist(X, Z, 'sqeuclidean'))
    else:
        K = (X.dot(Z.T) + spec.offset) ** spec.degree

    if not np.all(np.isfinite(K)):
        raise NumericError('Kernel matrix has non-finite values for {}'.format(spec))

    if zs is None:
        K = symmetrize(K)

    return K


class KernelModel(object):
    """State of kernelized Ridge Regression after t steps"""

    def __init__(self, spec, a, refactor_every=DEFAULT_REFACTOR_EVERY, max_steps=DEFAULT_MAX_STEPS):

        if not a > 0:
            raise ParamError('Ridge parameter a must be positive, got {}'.format(a))

        if refactor_every is not None and refactor_every < 1:
            raise ParamError('refactor_every must be positive or None, got {}'.format(refactor_every))

        self.spec = spec
        self.a = float(a)
        self.refactor_every = refactor_every
        self.max_steps = max_steps

        self.inputs = []
        self.ys = np.zeros(0)
        self.K = np.zeros((0, 0))
        self.g_inv = np.zeros((0, 0))
        self.t = 0

        self.log_det_acc = 0.0
        self.weighted_loss_acc = 0.0
        self.plain_loss_acc = 0.0
        self.clipped_loss_acc = 0.0
        self.log_loss_acc = 0.0

        # Largest relative drift of the incremental inverse seen at a refactor.
        # log_det_acc is not resynced at a refactor
        self.max_drift = 0.0

    def copy(self):
        m = KernelModel.__new__(KernelModel)
        m.__dict__.update(self.__dict__)
        m.inputs = list(self.inputs)
        return m

    def __repr__(self):
        return '<KernelModel {} a={} t={}>'.format(self.spec, self.a, self.t)


def kernel_vector(m, x):
    """Return (k, K(x, x)) for x against the stored inputs"""

    x = as_vec(x)
    kxx = kernel_eval(m.spec, x, x)

    if not m.inputs:
        return np.zeros(0), kxx

    return kernel_matrix(m.spec, m.inputs, [x])[:, 0], kxx


def _check_d(d, kxx, a):

    if not math.isfinite(d):
        raise NumericError('Non-finite denominator term {}'.format(d))

    if d < 0:
        if d < -NEGATIVE_D_TOL * max(1.0, abs(kxx) / a):
            raise NumericError('Negative Schur complement term d = {}; the kernel matrix is not '
                               'positive semidefinite or is numerically degenerate'.format(d))
        return 0.0

    return d


def krr_predict_values(m, k, kxx):
    """Return (gamma, d) from the kernel vector k and the value K(x, x)"""

    k = np.asarray(k, dtype=float).reshape(-1)
    kxx = float(kxx)

    if k.size != m.t:
        raise DimensionError('Expected {} kernel values, got {}'.format(m.t, k.size))

    if not (math.isfinite(kxx) and np.all(np.isfinite(k))):
        raise NumericError('Kernel values must be finite')

    if m.t == 0:
        return 0.0, _check_d(kxx / m.a, kxx, m.a)

    gk = m.g_inv.dot(k)
    gamma = float(m.ys.dot(gk))
    d = _check_d((kxx - float(k.dot(gk))) / m.a, kxx, m.a)

    return gamma, d


def krr_predict(m, x):
    """Return (gamma, d) for the input x. d is (K(x,x) - k'(aI+K)^-1 k)/a"""

    k, kxx = kernel_vector(m, x)

    return krr_predict_values(m, k, kxx)


def kbrr_predict(m, x, sigma):
    """The kernelized Bayesian Ridge Regression density N(gamma, sigma^2 (1 + d))"""

    from .bayes import PredictiveGaussian

    if not sigma > 0:
        raise ParamError('sigma must be positive, got {}'.format(sigma))

    gamma, d = krr_predict(m, x)

    return PredictiveGaussian(gamma, sigma ** 2 * (1.0 + d))


def refactor(m):
    """Recompute (aI + K)^-1 from a Cholesky factorization, in place. Returns the drift"""

    if m.t == 0:
        return 0.0

    try:
        factor = cho_factor(m.a * np.eye(m.t) + m.K, lower=True)
    except LinAlgError as e:
        raise NumericError('Failed to factor aI + K: {}'.format(e))

    dense = symmetrize(cho_solve(factor, np.eye(m.t)))
    drift = float(np.max(np.abs(dense - m.g_inv)) / max(1.0, np.max(np.abs(dense))))

    if drift > DRIFT_WARNING:
        logger.warning('Incremental inverse drifted by {:.3g} at step {}'.format(drift, m.t))
    else:
        logger.debug('Refactored at step {}, drift {:.3g}'.format(m.t, drift))

    m.g_inv = dense
    m.max_drift = max(m.max_drift, drift)

    return drift


def krr_update_values(m, k, kxx, y, x=None, clip_y=None, sigma=None):
    """Predict from kernel values, then learn from y

    Returns the new model and the step record. The record's q field holds d.
    """

    from .bayes import PredictiveGaussian, gaussian_log_loss

    if m.max_steps is not None and m.t >= m.max_steps:
        raise ParamError('Kernel model reached its limit of {} steps'.format(m.max_steps))

    y = float(y)
    if not math.isfinite(y):
        raise NumericError('Outcome must be finite, got {}'.format(y))

    k = np.asarray(k, dtype=float).reshape(-1)
    gamma, d = krr_predict_values(m, k, kxx)

    s = m.a * (1.0 + d)
    if not s > 0:
        raise NumericError('Schur complement {} is not positive'.format(s))

    t = m.t
    gk = m.g_inv.dot(k) if t else np.zeros(0)

    g_inv = np.empty((t + 1, t + 1))
    g_inv[:t, :t] = m.g_inv + np.outer(gk, gk) / s
    g_inv[:t, t] = -gk / s
    g_inv[t, :t] = -gk / s
    g_inv[t, t] = 1.0 / s

    K = np.empty((t + 1, t + 1))
    K[:t, :t] = m.K
    K[:t, t] = k
    K[t, :t] = k
    K[t, t] = kxx

    gamma_clipped = clip(gamma, clip_y) if clip_y is not None else None

    log_loss = None
    if sigma is not None:
        if not sigma > 0:
            raise ParamError('sigma must be positive, got {}'.format(sigma))
        log_loss = gaussian_log_loss(PredictiveGaussian(gamma, sigma ** 2 * (1.0 + d)), y)

    record = StepRecord(t + 1, x, y, gamma, d, gamma_clipped=gamma_clipped, log_loss=log_loss)

    new = m.copy()
    new.inputs.append(x)
    new.ys = np.append(m.ys, y)
    new.K = K
    new.g_inv = g_inv
    new.t = t + 1
    new.log_det_acc += math.log1p(d)
    new.weighted_loss_acc += record.weighted_sq_loss
    new.plain_loss_acc += record.sq_loss

    if gamma_clipped is not None:
        new.clipped_loss_acc += record.clipped_sq_loss

    if log_loss is not None:
        new.log_loss_acc += log_loss

    if new.refactor_every and new.t % new.refactor_every == 0:
        refactor(new)

    return new, record


def krr_update(m, x, y, clip_y=None, sigma=None):
    """Predict for the input x, then learn from y. Returns the new model and the step record"""

    if m.spec.kind == 'precomputed':
        raise ParamError('Use krr_update_values() with a precomputed kernel')

    x = as_vec(x)
    k, kxx = kernel_vector(m, x)

    new, record = krr_update_values(m, k, kxx, y, x=x, clip_y=clip_y, sigma=sigma)

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug('krr t={} gamma={:.6g} d={:.6g} y={:.6g}'.format(record.t, record.gamma, record.q, y))

    return new, record


def run_kernel(stream, spec, a, clip_y=None, sigma=None, refactor_every=DEFAULT_REFACTOR_EVERY,
               max_steps=DEFAULT_MAX_STEPS):
    """Run kernelized Ridge Regression over a stream

    The stream is a sequence of (x, y) pairs or, for the precomputed kernel, a
    KernelStream. Returns the final model and the step records.
    """

    from .streams import KernelStream, as_stream

    m = KernelModel(spec, a, refactor_every=refactor_every, max_steps=max_steps)
    records = []

    if spec.kind == 'precomputed':
        if not isinstance(stream, KernelStream):
            raise ParamError('A precomputed kernel needs a precomputed kernel stream')
        rows = stream

        def update(m, row):
            k, kxx, y = row
            return krr_update_values(m, k, kxx, y, clip_y=clip_y, sigma=sigma)
    else:
        rows = as_stream(stream)

        def update(m, row):
            x, y = row
            return krr_update(m, x, y, clip_y=clip_y, sigma=sigma)

    # Memory grows with the square of the step count, so refuse before the first update
    if max_steps is not None and len(rows) > max_steps:
        raise ParamError('Stream has {} steps, more than the kernel model limit of {}'.format(len(rows), max_steps))

    for i, row in enumerate(rows):
        try:
            m, r = update(m, row)
        except OnlineRidgeError as e:
            raise with_context(e, 'step {}'.format(i + 1))

        records.append(r)

    return m, records


def gram(stream, spec):
    """The full kernel matrix K_T of a stream, for the batch side of the checks"""

    from .streams import KernelStream, as_stream

    if isinstance(stream, KernelStream):
        return stream.gram()

    stream = as_stream(stream)

    if len(stream) == 0:
        return np.zeros((0, 0))

    return kernel_matrix(spec, stream.xs)


def _factor(K, a):
    try:
        return cho_factor(a * np.eye(K.shape[0]) + K, lower=True)
    except LinAlgError as e:
        raise NumericError('Failed to factor aI + K: {}'.format(e))


def representer_coefficients(K, ys, a):
    """c = (aI + K)^-1 Y, so that the minimizer is f = sum c_i K(x_i, .)"""

    if not a > 0:
        raise ParamError('Ridge parameter a must be positive, got {}'.format(a))

    ys = np.asarray(ys, dtype=float).reshape(-1)

    if ys.size == 0:
        return np.zeros(0)

    return cho_solve(_factor(np.asarray(K, dtype=float), a), ys)


def rkhs_min_value_gram(K, ys, a):
    """a Y'(aI + K)^-1 Y, the minimum over the RKHS of sum (y - f(x))^2 + a |f|^2"""

    ys = np.asarray(ys, dtype=float).reshape(-1)

    if ys.size == 0:
        return 0.0

    return a * float(ys.dot(representer_coefficients(K, ys, a)))


def rkhs_min_value(spec, inputs, ys, a):
    """The closed-form minimum over the RKHS for a kernel function and its inputs"""

    if not a > 0:
        raise ParamError('Ridge parameter a must be positive, got {}'.format(a))

    if len(ys) == 0:
        return 0.0

    return rkhs_min_value_gram(kernel_matrix(spec, inputs), ys, a)


def rkhs_min_direct(K, ys, a):
    """Minimize |Y - Kc|^2 + a c'Kc over the coefficients c directly

    Solves the normal equations (KK + aK)c = KY by least squares, which also works
    when K is singular. Returns (c, min_value).
    """

    K = np.asarray(K, dtype=float)
    ys = np.asarray(ys, dtype=float).reshape(-1)

    if ys.size == 0:
        return np.zeros(0), 0.0

    c = np.linalg.lstsq(K.dot(K) + a * K, K.dot(ys), rcond=None)[0]
    resid = ys - K.dot(c)

    return c, float(resid.dot(resid) + a * c.dot(K.dot(c)))


def log_det_kernel(K, a):
    """ln det(I + K/a), by dense factorization"""

    K = np.asarray(K, dtype=float)

    if K.shape[0] == 0:
        return 0.0

    return log_det_spd(np.eye(K.shape[0]) + K / a)


def tuned_a(c_f, T):
    """The ridge parameter c_F sqrt(T), for a horizon T known in advance"""

    if c_f is None or not c_f > 0:
        raise ParamError('The a = c_F sqrt(T) tuning needs c_F > 0, got {}'.format(c_f))

    if T < 1:
        raise ParamError('The horizon must be at least 1, got {}'.format(T))

    return c_f * math.sqrt(T)
