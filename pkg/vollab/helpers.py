from flask import request, abort as flask_abort
from flask import current_app, has_app_context
from flask_restful.reqparse import RequestParser, Argument
import flask_restful as restful
from flask_restful.utils import http_status_message

from werkzeug.exceptions import HTTPException

from functools import wraps
import numpy as np
import datadog as datadog_api

import config
from .common import *


def datadog(title, text=None, _log=True, **tags):
    """
    Call log.info and send event to datadog
    """
    if _log:
        log.info('{}: {}'.format(title, text) if text else title)
    if not config.DATADOG_API_KEY or config.TEST:
        return
    if has_app_context() and (current_app.debug or current_app.testing):
        return
    try:
        tags.setdefault('application', 'regime-vol-lab')
        datadog_api.api.Event.create(
            title=title,
            text=text,
            tags=[':'.join(map(str, item)) for item in tags.items()],
        )
    except Exception:
        log.exception('Datadog failure')
dd_stat = datadog_api.statsd


### Data returning ###
def abort(message, code=400, **kwargs):
    data = {'error_code': code, 'error': message}
    if kwargs:
        data.update(kwargs)

    log.warning('Aborting request {} /{}: {}'.format(
        # POST /v1/smth
        request.method,
        request.base_url.split('//',1)[-1].split('/',1)[-1],
        ', '.join(['{}: {}'.format(*i) for i in data.items()])))

    try:
        flask_abort(code)
    except HTTPException as e:
        e.data = data
        raise
restful.abort = lambda code,message: abort(message,code) # monkey-patch to use our approach to aborting
restful.utils.error_data = lambda code: {
    'error_code': code,
    'error': http_status_message(code)
}


def model_errors(func):
    """
    Decorator translating workbench exceptions into JSON aborts:
    invalid input gives 400, numeric failure 422.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except DomainError as e:
            abort(str(e), 400)
        except ComputationError as e:
            abort(str(e), 422)
    return wrapper


def json_body():
    data = request.get_json(force=True, silent=True)
    if not isinstance(data, dict):
        abort('Request body must be a JSON object')
    return data


### Field types ###
def boolean_field(val):
    if hasattr(val,'lower'):
        val = val.lower()
    if val in [0,False,'0','off','false','no']:
        return False
    if val in [1,True,'1','on','true','yes']:
        return True
    raise ValueError(str(val)+' is not boolean')

def fraction_field(val):
    """ float strictly inside (0, 1) """
    val = float(val)
    if not 0 < val < 1:
        raise ValueError('must lie strictly between 0 and 1')
    return val

def count_field(minimum=1):
    def check(val):
        if isinstance(val, float) and not val.is_integer():
            raise ValueError('must be an integer')
        val = int(val)
        if val < minimum:
            raise ValueError('must be at least {}'.format(minimum))
        return val
    return check

def series_field(val):
    """ list of finite numbers """
    if not isinstance(val, (list, tuple)):
        raise ValueError('must be a list of numbers')
    arr = np.asarray(val, dtype=float)
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ValueError('must be a flat list of finite numbers')
    return arr

def levels_field(val):
    if isinstance(val, str):
        val = val.split(',')
    if not isinstance(val, (list, tuple)):
        val = [val]
    levels = [float(x) for x in val]
    for rho in levels:
        if not 0 < rho < 0.5:
            raise ValueError('risk levels must lie in (0, 0.5)')
    return levels


def body_field(data, name, ftype=None, default=None, required=False):
    """
    Fetch and convert one value of a JSON body, aborting with
    the field name on failure.
    """
    if name not in data or data[name] is None:
        if required:
            abort('[{}]: Missing required parameter'.format(name), problem=name)
        return default
    if ftype is None:
        return data[name]
    try:
        return ftype(data[name])
    except (TypeError, ValueError) as e:
        abort('[{}]: {}'.format(name, e), problem=name)


### Extension of RequestParser ###
class MyArgument(Argument):
    def handle_validation_error(self, error, bundle_errors=None):
        help_str = '({}) '.format(self.help) if self.help else ''
        msg = '[{}]: {}{}'.format(self.name, help_str, error)
        abort(msg, problem=self.name)
class MyRequestParser(RequestParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.argument_class = MyArgument
