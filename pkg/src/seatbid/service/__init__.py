from .config import ServiceConfig, load_config
from .runtime import ServiceRuntime
from .app import create_app

__all__ = ["ServiceConfig", "load_config", "ServiceRuntime", "create_app"]
