"""Exception hierarchy shared by all modules."""


class PlumbingError(Exception):
    """Base class for every error raised by the package."""


class GraphSyntaxError(PlumbingError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateVertex(PlumbingError, ValueError):
    pass


class UnknownVertexInEdge(PlumbingError, ValueError):
    pass


class DuplicateEdge(PlumbingError, ValueError):
    pass


class NotATree(PlumbingError, ValueError):
    pass


class PatternMismatch(PlumbingError, ValueError):
    pass


class NotAdmissible(PlumbingError, ValueError):
    pass


class SingularBlock(PlumbingError, ArithmeticError):
    pass


class SingularMatrix(PlumbingError, ArithmeticError):
    pass


class NotHighDegree(PlumbingError, ValueError):
    pass


class PoleAtInput(PlumbingError, ArithmeticError):
    pass


class LevelTooSmall(PlumbingError, ValueError):
    pass


class Infeasible(PlumbingError, RuntimeError):
    """Work required exceeds the configured budget."""


class PreconditionViolated(PlumbingError, ValueError):
    pass


class RadiusTooClose(PlumbingError, RuntimeError):
    pass


class NoConvergence(PlumbingError, RuntimeError):
    pass


class OrderTooLarge(PlumbingError, ValueError):
    pass


class CalibrationFailed(PlumbingError, RuntimeError):
    pass


class OrderAmbiguous(PlumbingError, RuntimeError):
    pass


class ConditionViolated(PlumbingError, ValueError):
    def __init__(self, message, vertex=None):
        self.vertex = vertex
        super().__init__(message)
