"""Exception types shared across the package."""


class DomainError(ValueError):
    """A query falls outside the domain on which a quantity is defined."""


class DegeneracyError(DomainError):
    """A spectral decomposition is requested for a degenerate spectrum."""


class WindowError(DomainError):
    """A curve is evaluated outside its validity window."""


class VerificationError(AssertionError):
    """An oracle cross-check exceeded its tolerance."""
