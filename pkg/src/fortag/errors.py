"""Exception types shared across the pipeline."""


class FortagError(ValueError):
    """Base class for every error raised on bad input or inconsistent state."""


class FormatError(FortagError):
    """An input file or serialized artifact does not follow its format."""
