"""Sentence clustering for mixture N-gram and rule-in-context language models."""

__version__ = "0.1.0"
