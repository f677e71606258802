"""Exception hierarchy.

Two families matter to callers. Plain input problems derive from
``ValueError`` / ``KeyError`` and map to CLI exit code 1. Outcomes that
would contradict one of the engine's working assumptions, or that show a
search bound was too small, derive from :class:`ResearchEvent` and map to
exit code 2.
"""


class SingularMatrixError(ValueError):
    """Determinant is zero."""


class LevelError(ValueError):
    """Level N is not an odd integer >= 3."""


class NotInGamma0Error(ValueError):
    """Input matrix is outside Gamma_0(N) where membership is required."""


class NotInSubgroupError(ValueError):
    """Input matrix is outside the subgroup an operation expects."""


class SignQuotientError(ValueError):
    """Input is -1 times a decomposable matrix; signs are never identified."""


class MissingCertificateError(KeyError):
    """A prerequisite relation is absent from the knowledge base."""


class UnknownKeyError(KeyError):
    """A word token references a key the knowledge base does not hold."""


class ConsistencyError(AssertionError):
    """An identity that must hold exactly failed (implementation fault)."""


class ResearchEvent(Exception):
    """Base class for mathematically significant outcomes (exit code 2)."""


class PairingUniquenessError(ResearchEvent):
    """Both or neither pairing candidate was integral."""

    def __init__(self, message, parent=None, candidates=None):
        super().__init__(message)
        self.parent = parent
        self.candidates = candidates


class CoverageGapError(ResearchEvent):
    """Some admissible L-descriptor was never certified."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class SearchExhaustedError(ResearchEvent):
    """A bounded search ended without a witness."""

    def __init__(self, message, scanned=None, obstructed=False):
        super().__init__(message)
        self.scanned = scanned
        self.obstructed = obstructed


class VerificationError(ResearchEvent):
    """A stored certificate or decomposition failed to replay."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
