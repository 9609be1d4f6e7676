"""Exception taxonomy shared by the library and the CLI.

The CLI maps each class to a distinct process exit code, so library code
should raise the most specific one that applies.
"""


class TexSRError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class ConfigError(TexSRError):
    """Invalid configuration: unknown key, bad value, missing required entry."""

    exit_code = 2


class DataError(TexSRError):
    """Dataset or input image problems: missing files, wrong layout, bad shapes."""

    exit_code = 3


class NumericalError(TexSRError):
    """Numerical failure during training or inference (NaN/Inf loss or gradients)."""

    exit_code = 4


class CheckpointError(DataError):
    """Checkpoint file is malformed, truncated, tampered with, or incompatible."""
