"""Census engine for short Weierstrass curves ordered by height."""

__version__ = "0.1.0"
