"""Joint safety evaluation of object and lane perception for automated driving."""

__version__ = "0.1.0"
