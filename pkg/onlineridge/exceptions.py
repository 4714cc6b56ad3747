# -*- coding: utf-8 -*-
# Copyright (c) 2016 Civic Knowledge. This file is licensed under the terms of the
# MIT License, included in this distribution as LICENSE.txt

"""
Exceptions.
"""


class OnlineRidgeError(Exception):
    pass


class DimensionError(OnlineRidgeError):
    pass


class NumericError(OnlineRidgeError):
    pass


class ParamError(OnlineRidgeError):
    pass


class ConfigError(ParamError):
    pass


class InputError(OnlineRidgeError):
    pass


class ParseError(OnlineRidgeError):
    pass


class IoError(OnlineRidgeError, IOError):
    pass


def with_context(exc, context):
    """Return a new exception of the same type, with context prepended to the message"""
    new = type(exc)('{}: {}'.format(context, exc))
    new.__cause__ = exc
    return new
