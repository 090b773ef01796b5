"""Bilingual (English-Arabic) pre-training data pipeline."""

__version__ = "0.1.0"

from .errors import ConfigurationError, InputDataError

__all__ = ["ConfigurationError", "InputDataError", "__version__"]
