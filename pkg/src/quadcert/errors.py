"""Exception hierarchy shared by all modules."""


class QuadCertError(Exception):
    """Base class; the CLI maps it to exit code 2."""


class NotSquarefree(QuadCertError):
    pass


class OutOfRange(QuadCertError):
    pass


class MixedFields(QuadCertError):
    pass


class ZeroElement(QuadCertError):
    pass


class NotTotallyPositive(QuadCertError):
    pass


class PreconditionNotMet(QuadCertError):
    pass


class FirstElementNotOne(QuadCertError):
    pass


class NoGeneratorFound(QuadCertError):
    pass


class PerfectSquare(QuadCertError):
    pass


class HypothesisNotMet(QuadCertError):
    pass


class Undecided(QuadCertError):
    """A certified interval comparison did not separate within the precision cap."""


class Inadmissible(QuadCertError):
    pass


class ParityViolation(QuadCertError):
    pass


class EmptyWindow(QuadCertError):
    pass


class WindowViolation(QuadCertError):
    pass


class ZeroInput(QuadCertError):
    pass


class UnresolvedFactorization(QuadCertError):
    """Factorization effort exhausted; the CLI maps it to exit code 3."""

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n


class DegenerateSpec(QuadCertError):
    pass


class NonSquarefreeModulus(QuadCertError):
    pass


class NotSymmetric(QuadCertError):
    pass


class NotTotallyPositiveDefinite(QuadCertError):
    def __init__(self, message, minor=None, index=None):
        super().__init__(message)
        self.minor = minor
        self.index = index


class AlreadyRepresented(QuadCertError):
    pass


class QueueInvalid(QuadCertError):
    pass
