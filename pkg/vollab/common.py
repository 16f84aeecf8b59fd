import logging

from flask import current_app, has_app_context

import config


### Logging ###
class log_cls:
    """
    Just a handy wrapper for current_app.logger.
    Outside of application context (library use, tests)
    falls back to the package logger.
    """
    def __getattr__(self, name):
        if has_app_context():
            return getattr(current_app.logger, name)
        return getattr(logging.getLogger(config.LOGGER_NAME), name)
log = log_cls()


class classproperty:
    """
    Cached class property; evaluated only once
    """
    def __init__(self, fget):
        self.fget = fget
        self.obj = {}
    def __get__(self, owner, cls):
        if cls not in self.obj:
            self.obj[cls] = self.fget(cls)
        return self.obj[cls]


### Errors ###
class ModelError(Exception):
    """ Base class for all workbench failures """

class DomainError(ModelError, ValueError):
    """
    Invalid input: parameters outside the admissible region,
    inconsistent configuration, bad request values.
    """

class DataError(DomainError):
    """ Malformed input file; carries line number when known """
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ''
        if path:
            where += str(path)
        if line:
            where += '{}line {}'.format(':' if where else '', line)
        super().__init__('{}: {}'.format(where, message) if where else message)

class ComputationError(ModelError, ArithmeticError):
    """ Numeric failure: underflow, singular systems, sampler breakdown """


# CLI exit statuses
EXIT_OK = 0
EXIT_UNSTABLE = 1
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3
EXIT_IO = 4
