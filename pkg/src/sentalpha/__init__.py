"""Sentiment-augmented return-sign prediction and trading evaluation."""

__version__ = "0.1.0"

from .errors import SentalphaError

__all__ = ["SentalphaError", "__version__"]
