# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

from .exceptions import *
from .linalg import *
from .ridge import *
from .bayes import *
from .kernels import *
from .streams import *
from .bounds import *
from .experiment import ExperimentConfig, run_experiment, run_grid
from .stats import StepLogStats
