"""Stochastic-frequency quantum oscillator: phase SDE, stationary densities,
Airy-modulus spectra, frame S-matrices, averaged transitions and vacuum
thermodynamics."""

__version__ = "0.1.0"

from .errors import (AiryRangeError, CapabilityError, ConvergenceError, PreconditionError,
                     QrhoError, StabilityError)

__all__ = [
    "__version__",
    "QrhoError",
    "PreconditionError",
    "AiryRangeError",
    "CapabilityError",
    "ConvergenceError",
    "StabilityError",
]
