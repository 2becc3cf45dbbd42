"""Accuracy and transcript/translation consistency scoring for speech translation."""

__version__ = "0.1.0"
