"""Community-detection clustering for ad-hoc sensor networks."""

__version__ = "0.1.0"
