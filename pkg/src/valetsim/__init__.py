"""Camera-only autonomous valet parking simulator."""

__version__ = "0.1.0"
