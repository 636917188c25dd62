"""Exact-arithmetic certification of constraint qualifications for MPECs."""

__version__ = "0.1.0"
