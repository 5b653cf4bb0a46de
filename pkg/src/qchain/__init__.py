"""qchain - sequential quantum measurement chains, probes and consistent histories."""

from qchain.constants import APP_NAME, APP_VERSION

__all__ = ["APP_NAME", "APP_VERSION"]
__version__ = APP_VERSION
