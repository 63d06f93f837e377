"""Exception hierarchy shared by all modules."""


class KronTraceError(Exception):
    """Base class for every error raised by this package."""


class NetworkError(KronTraceError):
    pass


class DisconnectedGraph(NetworkError):
    pass


class NonpositiveConductance(NetworkError):
    pass


class DuplicateEdge(NetworkError):
    pass


class SelfLoop(NetworkError):
    pass


class EmptyInterior(NetworkError):
    pass


class BoundaryMeasureError(NetworkError):
    """Boundary vertex carrying positive m0, or a negative measure entry."""


class DimensionMismatch(KronTraceError):
    pass


class SchemaError(KronTraceError):
    """Malformed or unknown fields in a JSON document."""


class LevelOutOfRange(KronTraceError):
    pass


class BadDimensions(KronTraceError):
    pass


class SolverFailure(KronTraceError):
    pass


class NotInterior(KronTraceError):
    pass


class BadSet(KronTraceError):
    pass


class SingularRestriction(KronTraceError):
    pass


class ZeroCapacity(KronTraceError):
    pass


class NegativeOffDiagonal(KronTraceError):
    pass


class ZeroMass(KronTraceError):
    pass


class EmptyBall(KronTraceError):
    pass


class InsufficientScales(KronTraceError):
    pass


class DegenerateSample(KronTraceError):
    pass


class ResolutionTooCoarse(KronTraceError):
    pass


class UncoveredVertex(KronTraceError):
    pass


class EmptyPatch(KronTraceError):
    pass


class NoAdmissibleScales(KronTraceError):
    pass


class NoWitness(KronTraceError):
    pass


class SingularBallSystem(KronTraceError):
    pass


class EigenFailure(KronTraceError):
    pass


class WindowEmpty(KronTraceError):
    pass


class DegenerateFit(KronTraceError):
    pass
