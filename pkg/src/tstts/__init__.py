"""Verification of symbolic timed transition systems."""

__version__ = "0.1.0"
