"""Exception types raised across the package."""


class CoopMSRError(Exception):
    """Base class for every error raised by coopmsr."""


# field
class UnsupportedDegree(CoopMSRError, ValueError):
    pass


class DivisionByZero(CoopMSRError, ZeroDivisionError):
    pass


# linear algebra
class DimensionMismatch(CoopMSRError, ValueError):
    pass


class SingularMatrix(CoopMSRError, ArithmeticError):
    pass


class BadPartition(CoopMSRError, ValueError):
    pass


class BadIndex(CoopMSRError, IndexError):
    pass


# construction
class InvalidParams(CoopMSRError, ValueError):
    pass


class FieldTooSmall(InvalidParams):
    pass


class DegenerateGamma(CoopMSRError, ValueError):
    pass


class DuplicateLambda(CoopMSRError, ValueError):
    pass


class FlrViolation(CoopMSRError, ValueError):
    """Supplied (lambda, gamma) fail the nonvanishing condition."""


class NoValidGamma(CoopMSRError, RuntimeError):
    pass


# codec
class TooManyErasures(CoopMSRError, ValueError):
    pass


class SingularParityBlock(SingularMatrix):
    pass


# repair
class NotFailed(CoopMSRError, ValueError):
    pass


class BadFailureCount(CoopMSRError, ValueError):
    pass


class BadHelperCount(CoopMSRError, ValueError):
    pass


class Overlap(CoopMSRError, ValueError):
    pass


class MissingPayload(CoopMSRError, KeyError):
    pass


class MissingPiece(CoopMSRError, KeyError):
    pass


class SingularSystem(SingularMatrix):
    pass


# shard files
class ShardFormatError(CoopMSRError, ValueError):
    pass
