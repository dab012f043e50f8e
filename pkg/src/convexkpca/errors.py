"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class ConvexKpcaError(Exception):
    """Base class for all errors raised by convexkpca."""


# kernels
class AllPointsIdentical(ConvexKpcaError, ValueError):
    pass


class NonFiniteEntry(ConvexKpcaError, ValueError):
    pass


class DimensionMismatch(ConvexKpcaError, ValueError):
    pass


# spectral
class ConvergenceFailure(ConvexKpcaError, RuntimeError):
    pass


class SourceMismatch(ConvexKpcaError, ValueError):
    pass


class NotPSD(ConvexKpcaError, ValueError):
    pass


class NotExplicitFeatureMap(ConvexKpcaError, ValueError):
    pass


class RankDeficient(ConvexKpcaError, ValueError):
    pass


# semikpca / baselines
class UnboundedProblem(ConvexKpcaError, ValueError):
    """gamma is at or beyond the convexity limit 1/lambda_{k+1}."""


class SolveFailure(ConvexKpcaError, RuntimeError):
    pass


class NoLabels(ConvexKpcaError, ValueError):
    pass


# datasets
class ParseError(ConvexKpcaError, ValueError):
    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class UnknownLabel(ConvexKpcaError, ValueError):
    pass


class NotBinary(ConvexKpcaError, ValueError):
    pass


class NotEnoughPoints(ConvexKpcaError, ValueError):
    pass


class FractionOutOfRange(ConvexKpcaError, ValueError):
    pass


class UnknownDataset(ConvexKpcaError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


# cli
class ConfigError(ConvexKpcaError, ValueError):
    pass

