"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularEtaError(DomainError):
    """The deformation parameter makes sqrt(1 - eta**2) vanish (eta = +-1)."""


class ParametrizationError(DomainError):
    """The (theta0, phi0) parametrization of eta hits its pole."""


class DegeneracyError(RuntimeError):
    """Two numerical eigenvalues were matched to the same ladder label k."""


class TruncationError(RuntimeError):
    """A partial-wave expansion still carries too much weight at l_max."""


class EmptyPacketError(RuntimeError):
    """A ladder operation annihilated the packet."""


class AmplitudeOverflowError(OverflowError):
    """The closed-form amplitude overflows double precision."""
