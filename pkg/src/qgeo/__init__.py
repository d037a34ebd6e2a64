"""Information geometry of single-qubit state manifolds."""

from .errors import DegeneracyError, DomainError, VerificationError, WindowError
from .metrics import MetricKind
from .states import BlochPoint

__version__ = "0.1.0"

__all__ = [
    "BlochPoint",
    "DegeneracyError",
    "DomainError",
    "MetricKind",
    "VerificationError",
    "WindowError",
    "__version__",
]
