from flask import Blueprint
import flask_restful as restful


app = Blueprint('v1', __name__)
api = restful.Api(prefix='/v1')


def init_app(flask_app):
    if 'v1' in flask_app.blueprints:
        return # already initialized
    api.init_app(flask_app)
    flask_app.register_blueprint(app, url_prefix='/v1')


# now apply routes and signal receivers
from . import routes # noqa
from . import signals_definitions # noqa
