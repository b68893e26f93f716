"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class BoltzgapError(Exception):
    exit_code = 3
    kind = "error"

    def to_dict(self):
        return {"error": self.kind, "message": str(self)}


class ConfigError(BoltzgapError):
    exit_code = 2
    kind = "config"

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key

    def to_dict(self):
        d = super().to_dict()
        if self.key is not None:
            d["key"] = self.key
        return d


class NumericalError(BoltzgapError):
    exit_code = 3
    kind = "numerical"


class PreconditionError(NumericalError, ValueError):
    kind = "precondition"


class GridError(NumericalError):
    kind = "grid-too-coarse"


class QuadratureError(NumericalError):
    kind = "quadrature-nonconvergence"


class DiagonalSingularityError(NumericalError, ValueError):
    kind = "diagonal-singularity"


class DiscretizationError(NumericalError):
    kind = "discretization-inconsistent"


class DegenerateZeroError(NumericalError):
    kind = "degenerate-zero"


class SingularityError(NumericalError):
    kind = "singular-matrix"


class PositivityError(NumericalError):
    kind = "positivity-violation"


class ConservationError(NumericalError):
    kind = "conservation"


class WindowError(NumericalError):
    kind = "window"


class InfeasibleError(NumericalError):
    kind = "infeasible"

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class RangeError(NumericalError, ValueError):
    kind = "range"
