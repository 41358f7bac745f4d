"""Design and extraction tools for solidly-mounted Sezawa-mode resonators."""

__version__ = "0.1.0"
