"""Leafwise nonlinear elliptic equations on flat tori."""
__version__ = "0.1.0"
