"""Error taxonomy shared by all toolkit modules.

The CLI maps exceptions to exit codes: ValidationError -> 1, OSError -> 2.
Plain OSError (missing file, unwritable path) is used for IO failures;
everything content- or parameter-shaped raises ValidationError.
"""


class LexalignError(Exception):
    """Base class for toolkit errors; `category` feeds CLI error lines."""

    category = "validation"


class ValidationError(LexalignError):
    """Malformed content, violated invariant, or bad parameter value."""

    category = "validation"
