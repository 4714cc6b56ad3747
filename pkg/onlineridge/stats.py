# coding: utf-8
"""

Summary statistics of step logs, computed on the fly

Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
MIT License, included in this distribution as LICENSE.txt
"""

import logging
from collections import OrderedDict
from math import sqrt

import numpy as np
from livestats import livestats

from .exceptions import ParamError
from .streams import STEP_LOG_COLUMNS

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = STEP_LOG_COLUMNS[1:]


def text_hist(nums, ascii=False):

    if ascii:
        parts = ' _.,,-=T#'
    else:
        parts = ' ▁▂▃▄▅▆▇▉'

    nums = list(nums)

    if not nums:
        return ''

    fraction = max(nums) / float(len(parts) - 1)
    if fraction:
        return ''.join(parts[int(round(x / fraction))] for x in nums)
    else:
        return ''


class ColumnStats(object):
    """Running statistics for one numeric column of a step log"""

    num_bins = 16

    def __init__(self, name):
        self.name = name
        self.n = 0
        self.nulls = 0
        self.stats = livestats.LiveStats([0.25, 0.5, 0.75])
        self.values = []

    def add(self, v):

        if v is None:
            self.nulls += 1
            return

        v = float(v)

        self.n += 1
        self.stats.add(v)
        self.values.append(v)

    @property
    def mean(self):
        return self.stats.mean() if self.n else None

    @property
    def stddev(self):
        return sqrt(self.stats.variance()) if self.n else None

    @property
    def min(self):
        return self.stats.minimum() if self.n else None

    @property
    def max(self):
        return self.stats.maximum() if self.n else None

    def _quantile(self, i):
        try:
            return self.stats.quantiles()[i][1]
        except IndexError:
            return None

    @property
    def p25(self):
        return self._quantile(0)

    @property
    def p50(self):
        return self._quantile(1)

    @property
    def p75(self):
        return self._quantile(2)

    @property
    def bins(self):
        if not self.n:
            return []

        counts, _ = np.histogram(self.values, bins=self.num_bins)
        return [int(c) for c in counts]

    @property
    def dict(self):

        try:
            skewness = self.stats.skewness() if self.n else None
            kurtosis = self.stats.kurtosis() if self.n else None
        except ZeroDivisionError:
            skewness = kurtosis = float('nan')

        return OrderedDict([
            ('name', self.name),
            ('count', self.n),
            ('nulls', self.nulls),
            ('mean', self.mean),
            ('std', self.stddev),
            ('min', self.min),
            ('p25', self.p25),
            ('p50', self.p50),
            ('p75', self.p75),
            ('max', self.max),
            ('skewness', skewness),
            ('kurtosis', kurtosis),
            ('hist', text_hist(self.bins)),
        ])


class StepLogStats(object):
    """Per-column statistics of a step log

    The source is either StepRecords or the dicts that read_step_log() returns.
    """

    def __init__(self, source, columns=None):
        self._source = source
        self.columns = list(columns or SUMMARY_COLUMNS)

        for c in self.columns:
            if c not in SUMMARY_COLUMNS:
                raise ParamError("Unknown step log column '{}'".format(c))

        self._stats = OrderedDict((c, ColumnStats(c)) for c in self.columns)

    def __getitem__(self, item):
        return self._stats[item]

    def __contains__(self, item):
        return item in self._stats

    @property
    def dict(self):
        return self._stats

    def run(self):

        for row in self._source:
            row = row.dict if hasattr(row, 'dict') else row

            for c, stats in self._stats.items():
                stats.add(row.get(c))

        logger.debug('Summarized {} steps'.format(next(iter(self._stats.values())).n if self._stats else 0))

        return self

    def __str__(self):
        from tabulate import tabulate

        rows = [list(s.dict.values()) for s in self._stats.values() if s.n]

        if rows:
            headers = list(ColumnStats('').dict.keys())
            return 'Step log statistics \n' + tabulate(rows, headers, tablefmt='pipe', floatfmt='.6g')
        else:
            return 'Step log statistics: None \n'
