# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""

Data streams: loading them from CSV files, generating synthetic ones, and writing
streams and step logs back out.

A Stream holds the inputs as a T x n array and the outcomes as a length T array,
in protocol order. A KernelStream holds, for each step, the kernel values of the
new input against the earlier ones, K(x, x) and the outcome.

"""

import csv
import logging
import math
import os
from collections import OrderedDict

import numpy as np

from .exceptions import DimensionError, IoError, ParamError, ParseError
from .linalg import as_vec

logger = logging.getLogger(__name__)

STEP_LOG_COLUMNS = ['t', 'y', 'gamma', 'gamma_clipped', 'q_or_d', 'denom', 'sq_loss',
                    'weighted_sq_loss', 'log_loss']


def fmt_real(v):
    """17 significant digits, enough to read back the same double"""
    return '' if v is None else '{:.17g}'.format(v)


class Stream(object):
    """An ordered sequence of (x, y) pairs"""

    def __init__(self, xs, ys, meta=None):

        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float).reshape(-1)

        if self.xs.ndim != 2:
            raise DimensionError('Inputs must be a T x n array, got shape {}'.format(self.xs.shape))

        if self.xs.shape[0] != self.ys.size:
            raise DimensionError('Got {} inputs but {} outcomes'.format(self.xs.shape[0], self.ys.size))

        if self.xs.shape[1] < 1:
            raise DimensionError('Inputs must have a positive dimension')

        self.meta = OrderedDict(meta or {})

    @property
    def dim(self):
        return self.xs.shape[1]

    def __len__(self):
        return self.ys.size

    def __iter__(self):
        for i in range(self.ys.size):
            yield self.xs[i], float(self.ys[i])

    @property
    def max_norm_inf(self):
        return float(np.max(np.abs(self.xs))) if len(self) else 0.0

    @property
    def max_norm_2(self):
        return float(np.max(np.linalg.norm(self.xs, axis=1))) if len(self) else 0.0

    @property
    def max_abs_y(self):
        return float(np.max(np.abs(self.ys))) if len(self) else 0.0

    def __repr__(self):
        return '<Stream T={} n={}>'.format(len(self), self.dim)


def as_stream(stream, dim=None):
    """Convert a sequence of (x, y) pairs to a Stream. An empty sequence with no dim has dim 1"""

    if isinstance(stream, Stream):
        if dim is not None and stream.dim != dim:
            raise DimensionError('Expected a stream of dimension {}, got {}'.format(dim, stream.dim))
        return stream

    pairs = list(stream)

    if not pairs:
        return Stream(np.zeros((0, dim or 1)), np.zeros(0))

    xs = [as_vec(x, dim) for x, _ in pairs]
    n = xs[0].size

    for i, x in enumerate(xs):
        if x.size != n:
            raise DimensionError('Input {} has dimension {}, expected {}'.format(i + 1, x.size, n))

    return Stream(np.vstack(xs), [float(y) for _, y in pairs])


class KernelStream(object):
    """A stream given by kernel values instead of inputs

    Row t holds (k, kxx, y), where k has the t - 1 values K(x_i, x_t), i < t
    """

    def __init__(self, rows, meta=None):
        self.rows = []

        for i, (k, kxx, y) in enumerate(rows):
            k = np.asarray(k, dtype=float).reshape(-1)
            if k.size != i:
                raise DimensionError('Row {} needs {} kernel values, got {}'.format(i + 1, i, k.size))
            self.rows.append((k, float(kxx), float(y)))

        self.meta = OrderedDict(meta or {})

    @property
    def ys(self):
        return np.array([r[2] for r in self.rows])

    def gram(self):
        """Assemble the full T x T kernel matrix"""
        T = len(self.rows)
        K = np.zeros((T, T))

        for t, (k, kxx, _) in enumerate(self.rows):
            K[t, :t] = k
            K[:t, t] = k
            K[t, t] = kxx

        return K

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def max_abs_y(self):
        return float(np.max(np.abs(self.ys))) if self.rows else 0.0

    def __repr__(self):
        return '<KernelStream T={}>'.format(len(self))


def _open_csv(path):

    if not os.path.exists(path):
        raise IoError("No such file: '{}'".format(path))

    try:
        return open(path, newline='')
    except (IOError, OSError) as e:
        raise IoError("Can't open '{}': {}".format(path, e))


def _parse_real(cell, line, col, name):

    try:
        v = float(cell)
    except ValueError:
        raise ParseError("Line {}, column {} ('{}'): can't parse '{}' as a number".format(line, col, name, cell))

    if not math.isfinite(v):
        raise ParseError("Line {}, column {} ('{}'): value '{}' is not finite".format(line, col, name, cell))

    return v


def load_csv(path):
    """Load a stream from a CSV file with a header row f1,...,fn,y

    Rows are kept in file order. Blank lines are skipped.
    """

    with _open_csv(path) as f:
        reader = csv.reader(f)

        header = next(reader, None)

        while header is not None and not any(c.strip() for c in header):
            header = next(reader, None)

        if header is None:
            raise ParseError("'{}' is empty; expected a header row f1,...,fn,y".format(path))

        header = [c.strip() for c in header]

        expected = ['f{}'.format(i + 1) for i in range(len(header) - 1)] + ['y']

        if len(header) < 2 or header != expected:
            raise ParseError("'{}': header must be f1,...,fn,y, got '{}'".format(path, ','.join(header)))

        xs, ys = [], []

        for row in reader:
            if not any(c.strip() for c in row):
                continue

            if len(row) != len(header):
                raise ParseError("Line {}: expected {} cells, got {}".format(reader.line_num, len(header), len(row)))

            values = [_parse_real(c, reader.line_num, i + 1, header[i]) for i, c in enumerate(row)]

            xs.append(values[:-1])
            ys.append(values[-1])

    n = len(header) - 1

    logger.debug("Loaded {} rows of dimension {} from '{}'".format(len(ys), n, path))

    return Stream(np.array(xs).reshape(-1, n), ys, meta=OrderedDict([('source', path)]))


def load_kernel_csv(path):
    """Load a precomputed kernel stream

    The first row is a header. Data row t has t - 1 kernel values, then K(x_t, x_t),
    then y.
    """

    with _open_csv(path) as f:
        reader = csv.reader(f)

        if next(reader, None) is None:
            raise ParseError("'{}' is empty; expected a header row".format(path))

        rows = []

        for row in reader:
            if not any(c.strip() for c in row):
                continue

            t = len(rows) + 1

            if len(row) != t + 1:
                raise ParseError("Line {}: data row {} needs {} cells, got {}".format(
                    reader.line_num, t, t + 1, len(row)))

            names = ['k{}'.format(i + 1) for i in range(t - 1)] + ['kxx', 'y']
            values = [_parse_real(c, reader.line_num, i + 1, names[i]) for i, c in enumerate(row)]

            rows.append((values[:-2], values[-2], values[-1]))

    return KernelStream(rows, meta=OrderedDict([('source', path)]))


def write_stream_csv(stream, path):
    """Write a stream in the format load_csv() reads"""

    with open(path, 'w', newline='') as f:
        w = csv.writer(f)
        w.writerow(['f{}'.format(i + 1) for i in range(stream.dim)] + ['y'])

        for x, y in stream:
            w.writerow([fmt_real(v) for v in x] + [fmt_real(y)])


def write_step_log(records, path):
    """Write step records as CSV, one row per step"""

    with open(path, 'w', newline='') as f:
        w = csv.writer(f)
        w.writerow(STEP_LOG_COLUMNS)

        for r in records:
            d = r.dict
            w.writerow([d['t']] + [fmt_real(d[c]) for c in STEP_LOG_COLUMNS[1:]])


def read_step_log(path):
    """Read a step log back into a list of OrderedDicts. Empty cells become None"""

    out = []

    with _open_csv(path) as f:
        reader = csv.DictReader(f)

        for row in reader:
            d = OrderedDict()
            for c in STEP_LOG_COLUMNS:
                v = row.get(c, '')
                if c == 't':
                    d[c] = int(v)
                else:
                    d[c] = float(v) if v != '' else None
            out.append(d)

    return out


class SyntheticSpec(object):
    """Parameters of a synthetic stream y = theta'x + noise

    :param n: input dimension
    :param T: number of steps
    :param theta_star: 'random' (standard normal) or a vector
    :param noise_sigma: standard deviation of the Gaussian noise
    :param x_dist: ('uniform_cube', X), inputs uniform on [-X, X]^n, or ('sphere', Z),
        inputs uniform on the sphere of radius Z
    :param adversarial: None, 'constant_x' (every input equals the first) or
        'alternating_sign' (constant input, outcomes alternating -1, +1, scaled by y_bound)
    :param y_bound: if given, outcomes are clipped to [-y_bound, y_bound]
    """

    X_DISTS = ('uniform_cube', 'sphere')
    ADVERSARIAL = (None, 'constant_x', 'alternating_sign')

    def __init__(self, n, T, theta_star='random', noise_sigma=0.0, x_dist=('uniform_cube', 1.0),
                 adversarial=None, y_bound=None):
        self.n = n
        self.T = T
        self.theta_star = theta_star
        self.noise_sigma = noise_sigma
        self.x_dist = tuple(x_dist)
        self.adversarial = adversarial
        self.y_bound = y_bound

        self.validate()

    def validate(self):

        if int(self.n) != self.n or self.n < 1:
            raise ParamError('n must be a positive integer, got {}'.format(self.n))

        if int(self.T) != self.T or self.T < 0:
            raise ParamError('T must be a non-negative integer, got {}'.format(self.T))

        self.n, self.T = int(self.n), int(self.T)

        if not (self.noise_sigma >= 0 and math.isfinite(self.noise_sigma)):
            raise ParamError('noise_sigma must be >= 0, got {}'.format(self.noise_sigma))

        if len(self.x_dist) != 2 or self.x_dist[0] not in self.X_DISTS or not self.x_dist[1] > 0:
            raise ParamError('x_dist must be (uniform_cube|sphere, bound > 0), got {}'.format(self.x_dist))

        if self.adversarial not in self.ADVERSARIAL:
            raise ParamError("Unknown adversarial mode '{}'".format(self.adversarial))

        if self.y_bound is not None and not self.y_bound > 0:
            raise ParamError('y_bound must be positive, got {}'.format(self.y_bound))

        if not (isinstance(self.theta_star, str) and self.theta_star == 'random'):
            try:
                self.theta_star = as_vec(self.theta_star, self.n)
            except Exception as e:
                raise ParamError('theta_star must be "random" or a vector of dimension {}: {}'.format(self.n, e))

    @classmethod
    def parse(cls, s):
        """Parse an inline spec, like 'n=5,T=100,noise=0.1,x=sphere:1,theta=random,y_bound=1'

        A theta vector is written with semicolons: theta=1;0.5;-2
        """

        kwargs = {}

        for part in s.split(','):
            if not part.strip():
                continue

            k, sep, v = part.partition('=')
            k, v = k.strip(), v.strip()

            if not sep:
                raise ParamError("Bad synthetic parameter '{}'".format(part))

            try:
                if k == 'n':
                    kwargs['n'] = int(v)
                elif k == 'T':
                    kwargs['T'] = int(v)
                elif k in ('noise', 'noise_sigma'):
                    kwargs['noise_sigma'] = float(v)
                elif k == 'x':
                    dist, _, bound = v.partition(':')
                    dist = {'uniform': 'uniform_cube', 'cube': 'uniform_cube'}.get(dist, dist)
                    kwargs['x_dist'] = (dist, float(bound) if bound else 1.0)
                elif k == 'theta':
                    kwargs['theta_star'] = v if v == 'random' else [float(e) for e in v.split(';')]
                elif k == 'adversarial':
                    kwargs['adversarial'] = v or None
                elif k == 'y_bound':
                    kwargs['y_bound'] = float(v)
                else:
                    raise ParamError("Unknown synthetic parameter '{}'".format(k))
            except ValueError:
                raise ParamError("Bad value '{}' for synthetic parameter '{}'".format(v, k))

        if 'n' not in kwargs or 'T' not in kwargs:
            raise ParamError("Synthetic spec needs n and T, got '{}'".format(s))

        return cls(**kwargs)

    def __str__(self):
        theta = self.theta_star if isinstance(self.theta_star, str) else ';'.join(fmt_real(v) for v in self.theta_star)
        parts = ['n={}'.format(self.n), 'T={}'.format(self.T), 'noise={}'.format(self.noise_sigma),
                 'x={}:{}'.format(*self.x_dist), 'theta={}'.format(theta)]
        if self.adversarial:
            parts.append('adversarial={}'.format(self.adversarial))
        if self.y_bound is not None:
            parts.append('y_bound={}'.format(self.y_bound))
        return ','.join(parts)


def make_rng(seed):
    """The generator for everything random: PCG64, which gives the same stream on every platform"""
    return np.random.Generator(np.random.PCG64(seed))


def generate_synthetic(spec, seed):
    """Generate a stream from a SyntheticSpec. The same seed always gives the same stream"""

    spec.validate()
    rng = make_rng(seed)
    n, T = spec.n, spec.T

    if isinstance(spec.theta_star, str):
        theta = rng.standard_normal(n)
    else:
        theta = np.array(spec.theta_star, dtype=float)

    dist, bound = spec.x_dist

    if dist == 'uniform_cube':
        xs = rng.uniform(-bound, bound, size=(T, n))
    else:
        g = rng.standard_normal((T, n))
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0] = 1.0
        xs = g * (bound / norms)[:, None]

        # Roundoff can leave a norm a hair over the bound
        over = np.linalg.norm(xs, axis=1) / bound
        xs = xs / np.maximum(over, 1.0)[:, None]

    if spec.adversarial in ('constant_x', 'alternating_sign') and T:
        xs[:] = xs[0]

    if spec.adversarial == 'alternating_sign':
        ys = np.array([(-1.0) ** t for t in range(1, T + 1)]) * (spec.y_bound or 1.0)
    else:
        ys = xs.dot(theta)
        if spec.noise_sigma > 0:
            ys = ys + spec.noise_sigma * rng.standard_normal(T)

    if spec.y_bound is not None:
        ys = np.clip(ys, -spec.y_bound, spec.y_bound)

    stream = Stream(xs, ys)

    stream.meta.update([
        ('synthetic', str(spec)),
        ('seed', seed),
        ('theta_star', [float(v) for v in theta]),
        ('max_norm_inf', stream.max_norm_inf),
        ('max_norm_2', stream.max_norm_2),
        ('max_abs_y', stream.max_abs_y),
    ])

    return stream
