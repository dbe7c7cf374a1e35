"""Exception types shared across modules."""


class IndeterminateError(RuntimeError):
    """A numerical decision fell inside the indeterminate band, so neither
    answer could be verified."""


class VerificationError(RuntimeError):
    """A computed certificate or witness failed its own checks."""
