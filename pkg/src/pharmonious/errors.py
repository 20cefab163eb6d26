"""Exception types shared across the package."""


class SpaceFormatError(ValueError):
    """A space file or constructor argument violates the format contract."""


class DisconnectedSpaceError(ValueError):
    """A graph-metric distance query hit a pair with no connecting path."""


class ConfigurationError(ValueError):
    """An operation was asked of a space that is not set up for it
    (e.g. boundary distances on a space with an empty boundary)."""


class AdmissibilityError(ValueError):
    """A radius field violates admissibility and the operation refuses to run."""


class SeriesDivergenceError(ArithmeticError):
    """The fixed-point oscillation series diverges: the root-test margin
    |alpha| * limsup W_j(diam)^(1/j) is >= 1 for the supplied family."""


class CertificateScopeError(ValueError):
    """The requested certificate is outside the supported parameter range
    (the midrange-only case alpha = 1 has no certificate)."""


class CertificateResidualError(ValueError):
    """The field handed to certify() is not a fixed point at the required
    residual tolerance."""
