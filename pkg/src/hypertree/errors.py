"""Exception hierarchy shared across the package.

Each error class carries the process exit code the CLI maps it to.
"""


class HypertreeError(Exception):
    exit_code = 1


class InputError(HypertreeError):
    """Bad user input: malformed files, out-of-range parameters."""

    exit_code = 1


class ValidationError(HypertreeError):
    """Graph fails the structural requirements of the requested operation."""

    exit_code = 2


class TrainingError(HypertreeError):
    """Numerical failure during optimization (non-finite gradients etc.)."""

    exit_code = 3
