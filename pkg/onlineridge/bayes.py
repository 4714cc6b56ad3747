# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

Bayesian Ridge Regression and the Bayesian mixture over a finite set of experts

Bayesian Ridge Regression predicts the normal density N(gamma, sigma^2 (1 + q)),
where gamma and q come from the Ridge Regression learner. The finite mixture
weighs each Gaussian expert by exp(-cumulative log loss) times its prior mass;
everything is kept in log space.

"""

import logging
import math
from collections import OrderedDict

import numpy as np
from scipy.special import logsumexp

from .exceptions import DimensionError, NumericError, ParamError
from .linalg import as_vec
from .ridge import ridge_predict

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


def _check_sigma(sigma):
    if not sigma > 0:
        raise ParamError('sigma must be positive, got {}'.format(sigma))
    return float(sigma)


class PredictiveGaussian(object):
    """A normal predictive density, by mean and variance"""

    __slots__ = ('mean', 'variance')

    def __init__(self, mean, variance):

        if not (math.isfinite(mean) and math.isfinite(variance)):
            raise NumericError('Mean and variance must be finite, got {}, {}'.format(mean, variance))

        if not variance > 0:
            raise ParamError('Variance must be positive, got {}'.format(variance))

        self.mean = float(mean)
        self.variance = float(variance)

    def log_density(self, y):
        return -gaussian_log_loss(self, y)

    @property
    def dict(self):
        return OrderedDict([('mean', self.mean), ('variance', self.variance)])

    def __repr__(self):
        return '<PredictiveGaussian N({}, {})>'.format(self.mean, self.variance)


def gaussian_log_loss(p, y):
    """The log loss -ln p(y) of a normal density"""
    return 0.5 * (LOG_2PI + math.log(p.variance)) + (y - p.mean) ** 2 / (2.0 * p.variance)


def brr_predict(s, x, sigma):
    """The Bayesian Ridge Regression predictive density for x

    The mean is the Ridge Regression prediction and the variance is
    sigma^2 q + sigma^2, with q = x'A^-1x
    """

    sigma = _check_sigma(sigma)
    gamma, q = ridge_predict(s, x)
    sigma2 = sigma ** 2

    return PredictiveGaussian(gamma, sigma2 * q + sigma2)


def brr_posterior(s, sigma):
    """The posterior over the coefficients, N(A^-1 b, sigma^2 A^-1)"""

    sigma = _check_sigma(sigma)

    return s.a_inv.dot(s.b), sigma ** 2 * s.a_inv


def brr_cumulative_log_loss(records, sigma):
    """The cumulative log loss of Bayesian Ridge Regression, from a ridge run's records

    Uses the closed form

        (1/2) ln((2 pi sigma^2)^T prod(1 + q_t)) + (1/(2 sigma^2)) sum (y_t - gamma_t)^2 / (1 + q_t)
    """

    sigma = _check_sigma(sigma)
    records = list(records)

    if not records:
        return 0.0

    T = len(records)
    log_dets = math.fsum(math.log1p(r.q) for r in records)
    weighted = math.fsum(r.weighted_sq_loss for r in records)

    return 0.5 * (T * (LOG_2PI + 2.0 * math.log(sigma)) + log_dets) + weighted / (2.0 * sigma ** 2)


def expert_cumulative_log_loss(xs, ys, theta, sigma):
    """L_T(theta) for the Gaussian expert theta: (T/2) ln(2 pi sigma^2) + (1/(2 sigma^2)) sum (y - theta'x)^2"""

    sigma = _check_sigma(sigma)
    X = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.asarray(ys, dtype=float).reshape(-1)

    if ys.size == 0:
        return 0.0

    resid = ys - X.dot(as_vec(theta, X.shape[1]))

    return 0.5 * ys.size * (LOG_2PI + 2.0 * math.log(sigma)) + float(resid.dot(resid)) / (2.0 * sigma ** 2)


class GaussianExpert(object):
    """An expert that predicts N(theta'x, sigma^2)"""

    def __init__(self, theta, sigma):
        self.theta = as_vec(theta)
        self.sigma = _check_sigma(sigma)

    def predict(self, x):
        x = as_vec(x, self.theta.size)
        return PredictiveGaussian(float(self.theta.dot(x)), self.sigma ** 2)

    def __repr__(self):
        return '<GaussianExpert theta={} sigma={}>'.format(self.theta, self.sigma)


class FiniteBAState(object):
    """The Bayesian mixture over a finite set of experts"""

    def __init__(self, experts, prior=None):

        self.experts = list(experts)

        if not self.experts:
            raise ParamError('Need at least one expert')

        if prior is None:
            prior = np.full(len(self.experts), 1.0 / len(self.experts))

        prior = np.asarray(prior, dtype=float)

        if prior.shape != (len(self.experts),):
            raise DimensionError('Got {} prior masses for {} experts'.format(prior.size, len(self.experts)))

        if np.any(prior <= 0) or not np.all(np.isfinite(prior)):
            raise ParamError('Prior masses must be positive and finite')

        self.log_prior = np.log(prior) - math.log(prior.sum())
        self.log_weights = self.log_prior.copy()
        self.expert_losses = np.zeros(len(self.experts))
        self.cum_loss = 0.0
        self.t = 0

    def copy(self):
        s = FiniteBAState.__new__(FiniteBAState)
        s.__dict__.update(self.__dict__)
        s.log_weights = self.log_weights.copy()
        s.expert_losses = self.expert_losses.copy()
        return s

    @property
    def weights(self):
        """Normalized weights, the posterior over the experts"""
        return np.exp(self.log_weights - logsumexp(self.log_weights))


def finite_ba_new(experts, prior=None):
    """A fresh mixture. The prior defaults to uniform"""
    return FiniteBAState(experts, prior)


def _expert_log_losses(s, expert_preds, y):

    expert_preds = list(expert_preds)

    if len(expert_preds) != len(s.experts):
        raise DimensionError('Got {} predictions for {} experts'.format(len(expert_preds), len(s.experts)))

    return np.array([gaussian_log_loss(p, y) for p in expert_preds])


def finite_ba_predict(s, expert_preds, y):
    """The learner's log loss at y: -ln sum_i w_i p_i(y), with the normalized weights"""

    losses = _expert_log_losses(s, expert_preds, y)
    log_w = s.log_weights - logsumexp(s.log_weights)

    return -float(logsumexp(log_w - losses))


def finite_ba_step(s, expert_preds, y):
    """Predict the mixture, then charge every expert its log loss at y

    Returns the new state.
    """

    expert_preds = list(expert_preds)
    loss = finite_ba_predict(s, expert_preds, y)
    losses = _expert_log_losses(s, expert_preds, y)

    new = s.copy()
    new.log_weights = s.log_weights - losses
    new.expert_losses = s.expert_losses + losses
    new.cum_loss = s.cum_loss + loss
    new.t = s.t + 1

    return new


def finite_ba_loss_identity(s):
    """Return (lhs, rhs): the learner's cumulative loss and -ln sum_i prior_i e^{-L_T(theta_i)}"""

    return s.cum_loss, -float(logsumexp(s.log_prior - s.expert_losses))
