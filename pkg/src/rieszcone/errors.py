"""Exception hierarchy.

Every error raised by the library derives from :class:`RieszConeError`, so
callers can catch the whole family at once.
"""


class RieszConeError(Exception):
    """Base class for all library errors."""


# poset
class PosetError(RieszConeError):
    pass


class CycleDetected(PosetError):
    pass


class DuplicateElement(PosetError):
    pass


class UnknownLabelInRelation(PosetError):
    pass


# algebra
class AlgebraError(RieszConeError):
    pass


class MissingStructureConstant(AlgebraError):
    pass


class DimensionMismatch(AlgebraError):
    pass


class AlgebraMismatch(AlgebraError):
    pass


class NotHermitian(AlgebraError):
    pass


# cones and factorization
class NotInCone(RieszConeError):
    pass


class NotInDualCone(RieszConeError):
    pass


class NotInClosure(RieszConeError):
    pass


class SingularDiagonal(RieszConeError):
    pass


# powers and gamma functions
class MultiplierOutsideXpsi(RieszConeError):
    pass


class Divergent(RieszConeError):
    pass


# Gindikin set and measures
class SupportViolation(RieszConeError):
    pass


class NotInXi(RieszConeError):
    pass


class NotInXiComponent(RieszConeError):
    pass


class NotAbsolutelyContinuous(RieszConeError):
    pass


class EmptySample(RieszConeError):
    pass


# exponential families
class ZeroLambda(RieszConeError):
    pass


class NotNEF(RieszConeError):
    pass


# command line
class SpecError(RieszConeError):
    pass


class CheckFailed(RieszConeError):
    pass
