"""Transformer hidden-state exporter for the EMBD dump format."""

__version__ = "0.1.0"

from .exporter import ExportRequest, ExportResult, export, read_sentence_file

__all__ = ["ExportRequest", "ExportResult", "export", "read_sentence_file", "__version__"]
