"""Exception types shared across the toolkit."""


class ImpulseCertError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ImpulseCertError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(ImpulseCertError, ValueError):
    """A requested value lies outside the attainable range (e.g. inversion target)."""


class ClassValidationError(ImpulseCertError, ValueError):
    """A function failed comparison-class (K / K-infinity / KL) validation."""


class ConfigError(ImpulseCertError, ValueError):
    """A configuration, descriptor, or sampling specification is inconsistent."""


class HorizonError(ImpulseCertError, RuntimeError):
    """A search could not terminate within the allowed horizon."""


class EnvelopeError(ImpulseCertError, ValueError):
    """Declared envelope data is inconsistent with the sampled system behaviour."""


class NumericalError(ImpulseCertError, RuntimeError):
    """An underlying numerical routine failed (integrator step failure etc.)."""
