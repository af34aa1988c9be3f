"""veriknx: compile, formally verify, and run automation apps for KNX-style buildings."""

__version__ = "0.1.0"
