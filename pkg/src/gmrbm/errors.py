"""Exception types shared across the package.

The CLI maps these onto exit codes: config/usage problems -> 1, data/file
problems -> 2, numerical aborts -> 3.
"""


class ConfigError(ValueError):
    """Bad flags, config keys, or argument combinations."""


class CapacityError(ValueError):
    """An exact enumeration was requested beyond the configured code cap."""


class DataFormatError(ValueError):
    """A data or checkpoint file failed to parse; message carries location."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}: "
        if line is not None:
            loc += f"line {line}: "
        super().__init__(loc + message)
        self.path = path
        self.line = line


class NumericalAbort(FloatingPointError):
    """Training hit a non-finite gradient or parameter block."""
