"""Offline 3D detection metrics, synthetic driving studies, and
online-offline correlation reports."""

__version__ = "0.1.0"
