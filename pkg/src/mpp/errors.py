"""Exception hierarchy shared by every module of the package."""


class MPPError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateError(MPPError):
    """Input is collinear or has too few points."""


class SelfCrossingError(MPPError):
    pass


class CrossingConstraintsError(MPPError):
    pass


class CrossingCyclesError(MPPError):
    pass


class DegreeViolationError(MPPError):
    def __init__(self, vertex: int, degree: int):
        super().__init__(f"vertex {vertex} has degree {degree}, expected 2")
        self.vertex = vertex
        self.degree = degree


class NoPerfectMatchingError(MPPError):
    pass


class TooFewPointsError(MPPError):
    pass


class TooLargeError(MPPError):
    pass


class UnsatisfiableDegreeError(MPPError):
    def __init__(self, vertex: int):
        super().__init__(f"vertex {vertex} has fewer than 2 candidate edges")
        self.vertex = vertex


class BackendFailure(MPPError):
    pass


class NotSeparableError(MPPError):
    """Separation was asked to cut off a solution that is actually feasible."""


class NoCurveError(MPPError):
    pass


class NoTwoCrossingPathError(MPPError):
    pass


class ParseError(MPPError):
    def __init__(self, message: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(message + where)
        self.line = line


class UnsupportedWeightTypeError(MPPError):
    pass


class BadImageError(MPPError):
    pass


class EmptyDensityError(MPPError):
    pass


class NonPlanarError(MPPError):
    pass


class ParamsOutOfOrderError(MPPError):
    pass
