"""Exception hierarchy shared by all modules."""


class BogoliubovError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(BogoliubovError, ValueError):
    pass


class PreconditionError(BogoliubovError):
    """A positivity or spectral precondition of an operation is violated."""


class NotPositive(PreconditionError):
    pass


class HNotPositive(NotPositive):
    pass


class NotPSD(PreconditionError):
    pass


class ComplexSpectrum(PreconditionError):
    pass


class NearSingular(PreconditionError):
    pass


class SigmaPathSingular(PreconditionError):
    pass


class NotSymplectic(BogoliubovError):
    pass


class SingularP(NotSymplectic):
    pass


class DegenerateP(BogoliubovError):
    pass


class QuadratureNotConverged(BogoliubovError):
    pass


class DifferentiationUnstable(BogoliubovError):
    pass


class SizeLimit(BogoliubovError):
    pass


class EigensolverNotConverged(BogoliubovError):
    pass
