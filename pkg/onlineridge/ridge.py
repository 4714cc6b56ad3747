# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

Online Ridge Regression

At each step the learner reads x, predicts gamma = b'A^-1 x, then reads y and
updates A = A + xx' and b = b + yx. The state keeps A^-1 directly and updates it
with the Sherman-Morrison formula.

The update functions return a new state and the StepRecord for the step, so
the prediction is always made for the same x, before the outcome is seen.

"""

import logging
import math
from collections import OrderedDict

import numpy as np

from .exceptions import NumericError, OnlineRidgeError, ParamError, with_context
from .linalg import as_vec, check_q, sherman_morrison_update

logger = logging.getLogger(__name__)


class StepRecord(object):
    """What happened on one step of the online protocol"""

    __slots__ = ('t', 'x', 'y', 'gamma', 'gamma_clipped', 'q', 'denom',
                 'sq_loss', 'weighted_sq_loss', 'log_loss')

    def __init__(self, t, x, y, gamma, q, gamma_clipped=None, log_loss=None):
        self.t = t
        self.x = x
        self.y = y
        self.gamma = gamma
        self.gamma_clipped = gamma_clipped
        self.q = q
        self.denom = 1.0 + q
        self.sq_loss = (y - gamma) ** 2
        self.weighted_sq_loss = self.sq_loss / self.denom
        self.log_loss = log_loss

    @property
    def clipped_sq_loss(self):
        if self.gamma_clipped is None:
            return None
        return (self.y - self.gamma_clipped) ** 2

    @property
    def dict(self):
        """Return the row for the step log. The q column holds the kernel d for kernel learners"""
        return OrderedDict([
            ('t', self.t),
            ('y', self.y),
            ('gamma', self.gamma),
            ('gamma_clipped', self.gamma_clipped),
            ('q_or_d', self.q),
            ('denom', self.denom),
            ('sq_loss', self.sq_loss),
            ('weighted_sq_loss', self.weighted_sq_loss),
            ('log_loss', self.log_loss),
        ])

    def __repr__(self):
        return '<StepRecord t={} y={} gamma={} q={}>'.format(self.t, self.y, self.gamma, self.q)


class RidgeState(object):
    """State of the online Ridge Regression learner after t steps"""

    def __init__(self, a, dim):

        if not a > 0:
            raise ParamError('Ridge parameter a must be positive, got {}'.format(a))

        if int(dim) != dim or dim < 1:
            raise ParamError('Dimension must be a positive integer, got {}'.format(dim))

        self.a = float(a)
        self.dim = int(dim)
        self.a_inv = np.eye(self.dim) / self.a
        self.b = np.zeros(self.dim)
        self.t = 0
        self.log_det_acc = 0.0
        self.weighted_loss_acc = 0.0
        self.plain_loss_acc = 0.0
        self.clipped_loss_acc = 0.0
        self.log_loss_acc = 0.0

    def copy(self):
        s = RidgeState.__new__(RidgeState)
        s.__dict__.update(self.__dict__)
        s.a_inv = self.a_inv.copy()
        s.b = self.b.copy()
        return s

    @property
    def theta(self):
        return self.a_inv.dot(self.b)

    def __repr__(self):
        return '<RidgeState a={} dim={} t={}>'.format(self.a, self.dim, self.t)


def ridge_new(a, dim):
    """A fresh learner, with A^-1 = I/a and b = 0"""
    return RidgeState(a, dim)


def ridge_predict(s, x):
    """Return (gamma, q), the prediction b'A^-1x and the form q = x'A^-1x"""

    x = as_vec(x, s.dim)
    ax = s.a_inv.dot(x)

    gamma = float(s.b.dot(ax))
    q = check_q(float(x.dot(ax)))

    return gamma, q


def ridge_theta(s):
    """Current ridge coefficients A^-1 b"""
    return s.theta


def clip(gamma, bound_y):
    """Clip a prediction to [-bound_y, bound_y]"""

    if not bound_y > 0:
        raise ParamError('Clipping bound must be positive, got {}'.format(bound_y))

    return min(max(gamma, -bound_y), bound_y)


def _check_outcome(y):
    y = float(y)
    if not math.isfinite(y):
        raise NumericError('Outcome must be finite, got {}'.format(y))
    return y


def _advance(s, x, y, gamma, q, clip_y, sigma):
    """Record the step and return the updated state. gamma is what the learner predicted."""

    from .bayes import PredictiveGaussian, gaussian_log_loss

    gamma_clipped = clip(gamma, clip_y) if clip_y is not None else None

    log_loss = None
    if sigma is not None:
        if not sigma > 0:
            raise ParamError('sigma must be positive, got {}'.format(sigma))
        sigma2 = float(sigma) ** 2
        log_loss = gaussian_log_loss(PredictiveGaussian(gamma, sigma2 * q + sigma2), y)

    record = StepRecord(s.t + 1, x, y, gamma, q, gamma_clipped=gamma_clipped, log_loss=log_loss)

    new = s.copy()
    new.a_inv, _ = sherman_morrison_update(s.a_inv, x)
    new.b = s.b + y * x
    new.t = s.t + 1
    new.log_det_acc += math.log1p(q)
    new.weighted_loss_acc += record.weighted_sq_loss
    new.plain_loss_acc += record.sq_loss

    if gamma_clipped is not None:
        new.clipped_loss_acc += record.clipped_sq_loss

    if log_loss is not None:
        new.log_loss_acc += log_loss

    return new, record


def ridge_update(s, x, y, clip_y=None, sigma=None):
    """Predict for x, then learn from y

    Returns the new state and the StepRecord of the step. When clip_y is given the
    record also has the prediction clipped to [-clip_y, clip_y]; the state is
    updated the same way either way. When sigma is given the record has the log
    loss of the Bayesian Ridge Regression predictive density.
    """

    x = as_vec(x, s.dim)
    y = _check_outcome(y)

    gamma, q = ridge_predict(s, x)

    new, record = _advance(s, x, y, gamma, q, clip_y, sigma)

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug('ridge t={} gamma={:.6g} q={:.6g} y={:.6g}'.format(record.t, gamma, q, y))

    return new, record


def vaw_predict(s, x):
    """The VAW prediction b'(A + xx')^-1 x. The state is not changed"""

    x = as_vec(x, s.dim)
    a_inv, _ = sherman_morrison_update(s.a_inv, x)

    return float(s.b.dot(a_inv.dot(x)))


def vaw_update(s, x, y, clip_y=None):
    """Like ridge_update, but the learner predicts with the VAW predictor

    The record's q is still x'A^-1x for the state before the step.
    """

    x = as_vec(x, s.dim)
    y = _check_outcome(y)

    _, q = ridge_predict(s, x)
    gamma = vaw_predict(s, x)

    return _advance(s, x, y, gamma, q, clip_y, None)


def run_ridge(stream, a, clip_y=None, sigma=None, dim=None, vaw=False):
    """Run the learner over a stream of (x, y) pairs

    Returns the final state and the list of step records
    """

    from .streams import as_stream

    stream = as_stream(stream, dim=dim)

    s = ridge_new(a, stream.dim)
    records = []

    for i, (x, y) in enumerate(stream):
        try:
            if vaw:
                s, r = vaw_update(s, x, y, clip_y=clip_y)
            else:
                s, r = ridge_update(s, x, y, clip_y=clip_y, sigma=sigma)
        except OnlineRidgeError as e:
            raise with_context(e, 'step {}'.format(i + 1))

        records.append(r)

    return s, records
