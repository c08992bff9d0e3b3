"""Exception types raised across the package."""


class SmoothlabError(Exception):
    """Base class for all errors raised by smoothlab."""


class TiltOutOfRange(SmoothlabError, ValueError):
    """A tilt or MGF argument lies outside the open interval (-t0, t0)."""


class IntegrabilityViolation(SmoothlabError, ArithmeticError):
    """A quadrature tail check detected that the integrand is not integrable."""


class ParameterOutOfRange(SmoothlabError, ValueError):
    """(beta, delta) violate the admissibility radius eps0 = min(t0/2, t0/(2 s0))."""


class QuadratureFailure(SmoothlabError, ArithmeticError):
    pass


class OutOfImage(SmoothlabError, ValueError):
    """The target value is not attained by F_beta on the admissible interval."""


class EmptyDisorder(SmoothlabError, ValueError):
    pass


class BracketNotFound(SmoothlabError, ArithmeticError):
    pass


class EnumerationTooLarge(SmoothlabError, ValueError):
    pass


class DegenerateEstimate(SmoothlabError, ArithmeticError):
    """An estimator has no sample in the event of interest."""


class ConfigError(SmoothlabError, ValueError):
    """Invalid or incomplete experiment configuration."""
