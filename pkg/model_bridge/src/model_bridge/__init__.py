"""Reference answer server: an off-the-shelf extractive QA model behind the
batched /answer token-span protocol."""

__version__ = "0.1.0"

from .engine import QAEngine, ServerConfig  # noqa: F401
from .server import create_app  # noqa: F401
