"""Shared exception types. The CLI maps these to exit codes."""


class ConfigError(Exception):
    """Bad configuration: missing columns, unknown keys, invalid values."""


class DataError(Exception):
    """Bad input data: malformed files, empty corpora, infeasible inputs."""
