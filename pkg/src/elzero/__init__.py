"""Proof checking and program extraction for EL0 and its affine restrictions."""

__version__ = "0.1.0"
