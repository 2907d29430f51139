"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad user-supplied configuration: unknown function name, malformed
    truth-table file, non-reciprocal grid step, mismatched grids, ..."""


class NotCertifiedError(RuntimeError):
    """A lower bound was requested from a field whose membership check
    did not pass (or was never run)."""
