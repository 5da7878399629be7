"""Exception hierarchy shared by every layer of the engine."""


class BSDError(Exception):
    """Base class for all engine errors."""


# scalars
class DivisionByZero(BSDError, ZeroDivisionError):
    pass


class BackendMismatch(BSDError, TypeError):
    pass


class NotPositiveReal(BSDError, ValueError):
    pass


class NotRepresentable(BSDError, ValueError):
    """An exact square root left the Gaussian rationals; retry on floats."""


# series / matrices
class CatalogMismatch(BSDError, ValueError):
    pass


class OrderViolation(BSDError, ValueError):
    pass


class NotAUnit(BSDError, ValueError):
    pass


class DimensionMismatch(BSDError, ValueError):
    pass


class SingularConstantTerm(BSDError, ValueError):
    pass


# model / automorphisms
class BasePointMismatch(BSDError, ValueError):
    pass


class NotPositiveDefinite(BSDError, ValueError):
    pass


class RealityRelationViolated(BSDError, ValueError):
    pass


class PointNotOnModel(BSDError, ValueError):
    pass


class ParameterOutOfRange(BSDError, ValueError):
    pass


class SignatureMismatch(BSDError, ValueError):
    pass


class CertificationFailed(BSDError, ValueError):
    """A constructed automorphism does not preserve its model."""


# normalization pipeline
class NotAnEmbedding(BSDError, ValueError):
    pass


class GramRelationViolated(BSDError, ValueError):
    pass


class RankUndetermined(BSDError, ValueError):
    pass


class FactorizationFailed(BSDError, ValueError):
    pass


class ReductionIncomplete(BSDError, ValueError):
    pass


class UnsupportedSignature(BSDError, ValueError):
    pass


class HypothesisViolated(BSDError, ValueError):
    pass


class StageError(BSDError):
    """Wraps a failure inside `classify` with the name of the failing stage."""

    def __init__(self, stage, error):
        super().__init__(f"{stage}: {type(error).__name__}: {error}")
        self.stage = stage
        self.error = error
