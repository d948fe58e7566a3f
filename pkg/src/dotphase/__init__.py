"""Desk-scale simulator of cavity-coupled double-dot phase estimation,
pulse-level gate physics, and the derived timepiece/length calibration."""

__version__ = "0.1.0"
