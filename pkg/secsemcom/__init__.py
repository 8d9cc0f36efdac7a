"""Secure semantic communication over simulated wiretap channels."""

__version__ = "0.1.0"
