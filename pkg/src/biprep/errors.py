"""Exception types shared across pipeline stages."""


class ConfigurationError(ValueError):
    """Invalid option, threshold, size, or plan (CLI exit code 2)."""


class InputDataError(ValueError):
    """Unusable input data: bad encoding, schema, or references (CLI exit code 1)."""
