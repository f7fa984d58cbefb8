"""Cyber-effects simulation toolkit for discrete-event control-loop models."""

__version__ = "0.1.0"
