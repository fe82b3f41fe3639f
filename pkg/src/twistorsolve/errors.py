"""Exception and warning classes.

Every error carries a short machine-readable ``code`` so grid sweeps can
record per-point failures as holes instead of aborting.
"""


class TwistorError(Exception):
    code = "TwistorError"


# circle kernel
class NearZeroOnCircle(TwistorError):
    code = "NearZeroOnCircle"


class PhaseJumpTooLarge(TwistorError):
    code = "PhaseJumpTooLarge"


class NonzeroIndex(TwistorError):
    code = "NonzeroIndex"


class TArgumentOutOfDisk(TwistorError):
    code = "TArgumentOutOfDisk"


class SpectralTailTooFat(TwistorError):
    code = "SpectralTailTooFat"


class SpectralTailWarning(UserWarning):
    pass


# scaffolds
class DuplicateNodes(TwistorError):
    code = "DuplicateNodes"


class LambdaZero(TwistorError):
    code = "LambdaZero"


class FMinusNearZero(TwistorError):
    code = "FMinusNearZero"


class NodePlacement(TwistorError):
    code = "NodePlacement"


# Riemann solver
class IndexNotOne(TwistorError):
    code = "IndexNotOne"


class MaxItersExceeded(TwistorError):
    code = "MaxItersExceeded"


class LeftTDisk(TwistorError):
    code = "LeftTDisk"


class PathLeftValidityRegion(TwistorError):
    code = "PathLeftValidityRegion"


class GluingIndexMismatch(TwistorError):
    code = "GluingIndexMismatch"


# equation / geometry
class DegenerateLambdas(TwistorError):
    code = "DegenerateLambdas"


class CoincidentPoints(TwistorError):
    code = "CoincidentPoints"


class RatioDegenerate(TwistorError):
    code = "RatioDegenerate"


class GridTooSmall(TwistorError):
    code = "GridTooSmall"


class LambdaContainsZeroOrInfinity(TwistorError):
    code = "LambdaContainsZeroOrInfinity"


class UnknownFixture(TwistorError):
    code = "UnknownFixture"


class InvalidTriple(TwistorError):
    code = "InvalidTriple"


# inverse construction
class DerivativeBlowup(TwistorError):
    code = "DerivativeBlowup"


class LeftDomain(TwistorError):
    code = "LeftDomain"


class MuTooCloseToPole(TwistorError):
    code = "MuTooCloseToPole"


class ODEStepFailure(TwistorError):
    code = "ODEStepFailure"


class NondegeneracyLost(TwistorError):
    code = "NondegeneracyLost"


class QEqualsOne(TwistorError):
    code = "QEqualsOne"


class InverseOutOfRange(TwistorError):
    code = "InverseOutOfRange"


# Baecklund
class ProportionalTriples(TwistorError):
    code = "ProportionalTriples"


class HypothesisViolated(TwistorError):
    code = "HypothesisViolated"
