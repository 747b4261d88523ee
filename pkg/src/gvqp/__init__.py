"""gvqp: no-reference gaming video quality prediction toolkit."""

__version__ = "0.1.0"
