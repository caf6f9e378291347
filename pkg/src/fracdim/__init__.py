"""Vector calculus and integration in non-integer-dimensional product spaces."""

__version__ = "0.1.0"
