from ..observability.logging import configure_default_logging

configure_default_logging()
