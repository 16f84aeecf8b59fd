from .main import init_app
