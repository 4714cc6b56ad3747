# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

Dense linear algebra used by all of the learners: rank-one inverse updates,
positive definite solves, log determinants and the Gaussian quadratic integral.

Vectors are 1-D float64 numpy arrays and matrices are 2-D float64 numpy arrays.
The as_vec() and as_sym_matrix() functions do the checking.

"""

import logging
import math

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import DimensionError, NumericError, ParamError

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-12

# Quadratic forms this far below zero are roundoff, not indefiniteness
NEGATIVE_Q_ATOL = 1e-12


def as_vec(x, dim=None):
    """Convert x to a finite 1-D float array, optionally checking its dimension"""

    try:
        v = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as e:
        raise NumericError("Can't convert {!r} to a real vector: {}".format(x, e))

    if v.ndim == 0:
        v = v.reshape(1)
    elif v.ndim != 1:
        raise DimensionError('Expected a vector, got an array of shape {}'.format(v.shape))

    if v.size == 0:
        raise DimensionError('Vectors must have a positive dimension')

    if dim is not None and v.size != dim:
        raise DimensionError('Expected a vector of dimension {}, got {}'.format(dim, v.size))

    if not np.all(np.isfinite(v)):
        raise NumericError('Vector has non-finite entries: {}'.format(v))

    return v


def as_sym_matrix(m, dim=None):
    """Convert m to a finite, square, symmetric float matrix"""

    try:
        a = np.asarray(m, dtype=float)
    except (TypeError, ValueError) as e:
        raise NumericError("Can't convert to a real matrix: {}".format(e))

    if a.ndim == 0:
        a = a.reshape(1, 1)

    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError('Expected a non-empty square matrix, got shape {}'.format(a.shape))

    if dim is not None and a.shape[0] != dim:
        raise DimensionError('Expected a {0}x{0} matrix, got {1}'.format(dim, a.shape))

    if not np.all(np.isfinite(a)):
        raise NumericError('Matrix has non-finite entries')

    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise NumericError('Matrix is not symmetric')

    return a


def symmetrize(m):
    return (m + m.T) / 2.0


def check_q(q, what='quadratic form'):
    """Clamp a quadratic form that is negative by roundoff to 0; reject real negatives"""

    if not math.isfinite(q):
        raise NumericError('Non-finite {}: {}'.format(what, q))

    if q < 0:
        if q < -NEGATIVE_Q_ATOL:
            raise NumericError('Negative {} {}; the matrix is not positive definite'.format(what, q))
        return 0.0

    return q


def sherman_morrison_update(a_inv, x):
    """Return ((A + xx')^-1, q) given A^-1, where q = x'A^-1x

    The result is re-symmetrized to keep it from drifting over many updates. A zero
    x leaves the inverse unchanged.
    """

    a_inv = np.asarray(a_inv, dtype=float)

    if a_inv.ndim != 2 or a_inv.shape[0] != a_inv.shape[1]:
        raise DimensionError('Expected a square matrix, got shape {}'.format(a_inv.shape))

    x = as_vec(x, a_inv.shape[0])

    if not np.all(np.isfinite(a_inv)):
        raise NumericError('Inverse matrix has non-finite entries')

    ax = a_inv.dot(x)
    q = check_q(float(x.dot(ax)))

    updated = symmetrize(a_inv - np.outer(ax, ax) / (1.0 + q))

    return updated, q


def _stack(xs, ys=None, dim=None):
    """Stack a sequence of vectors into a T x n array, checking dimensions"""

    xs = list(xs)

    if not xs:
        if dim is None:
            raise DimensionError('The dimension is required when there is no data')
        return np.zeros((0, dim))

    rows = [as_vec(x, dim) for x in xs]
    n = rows[0].size

    for i, r in enumerate(rows):
        if r.size != n:
            raise DimensionError('Input {} has dimension {}, expected {}'.format(i, r.size, n))

    if ys is not None and len(ys) != len(rows):
        raise DimensionError('Got {} inputs but {} outcomes'.format(len(rows), len(ys)))

    return np.vstack(rows)


def batch_ridge(xs, ys, a, dim=None):
    """Solve the ridge problem in one batch

    Returns (theta, min_value), where theta = (aI + X'X)^-1 X'Y, computed with
    a Cholesky solve, and min_value = sum (y - theta'x)^2 + a|theta|^2

    :param xs: sequence of input vectors, or a T x n array
    :param ys: sequence of outcomes
    :param a: ridge parameter, > 0
    :param dim: dimension of the inputs; required only when xs is empty
    """

    if not a > 0:
        raise ParamError('Ridge parameter a must be positive, got {}'.format(a))

    ys = np.asarray(list(ys), dtype=float).reshape(-1)

    if not np.all(np.isfinite(ys)):
        raise NumericError('Outcomes have non-finite entries')

    X = _stack(xs, ys, dim)
    n = X.shape[1]

    if X.shape[0] == 0:
        return np.zeros(n), 0.0

    A = a * np.eye(n) + X.T.dot(X)

    try:
        theta = cho_solve(cho_factor(A, lower=True), X.T.dot(ys))
    except LinAlgError as e:
        raise NumericError('Failed to factor the ridge matrix: {}'.format(e))

    resid = ys - X.dot(theta)
    min_value = float(resid.dot(resid) + a * theta.dot(theta))

    return theta, min_value


def log_det_spd(m):
    """ln det of a symmetric positive definite matrix, from its Cholesky factor"""

    try:
        c, _ = cho_factor(m, lower=True)
    except LinAlgError as e:
        raise NumericError('Matrix is not positive definite: {}'.format(e))

    return 2.0 * float(np.sum(np.log(np.diag(c))))


def gaussian_quadratic_integral(A, b, c):
    """Log of the integral of exp(-(t'At + b't + c)) over R^n

    Returns -W0 + (n/2) ln(pi) - (1/2) ln det A, where W0 = c - b'A^-1b/4 is the
    minimum of the quadratic.
    """

    A = as_sym_matrix(A)
    n = A.shape[0]
    b = as_vec(b, n)

    try:
        factor = cho_factor(A, lower=True)
    except LinAlgError as e:
        raise NumericError('Matrix is not positive definite: {}'.format(e))

    w0 = float(c) - float(b.dot(cho_solve(factor, b))) / 4.0
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))

    return -w0 + (n / 2.0) * math.log(math.pi) - 0.5 * log_det


def log_det_from_products(qs):
    """Sum of ln(1 + q) over per-step quadratic forms

    When qs are the forms x_t'A_{t-1}^-1x_t of a ridge run, this is
    ln det(I + (1/a) sum x_t x_t').
    """

    total = 0.0

    for i, q in enumerate(qs):
        q = float(q)
        if not math.isfinite(q) or q < 0:
            raise NumericError('Quadratic form {} at position {} must be finite and >= 0'.format(q, i))
        total += math.log1p(q)

    return total


def log_det_gram(xs, a, dim=None):
    """ln det(I + (1/a) X'X), by dense factorization"""

    if not a > 0:
        raise ParamError('Ridge parameter a must be positive, got {}'.format(a))

    X = _stack(xs, dim=dim)
    n = X.shape[1]

    return log_det_spd(np.eye(n) + X.T.dot(X) / a)
