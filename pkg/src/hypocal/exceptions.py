"""Error hierarchy shared by the numerical services and the command line."""


class HypocalError(Exception):
    """Base class for every error raised by hypocal."""


# Numerical model

class HypoplasticityError(HypocalError):
    """Failure while evaluating the hypoplastic rate equations."""


class DomainError(HypoplasticityError, ValueError):
    """Argument outside the mathematical domain of a model function."""


class InadmissibleStateError(HypoplasticityError):
    """State violates tr(T) < 0 or e_d <= e <= e_i."""


class NonUniqueRootError(HypoplasticityError):
    """The triaxial norm quadratic has zero or two positive roots."""

    def __init__(self, roots, message: str | None = None):
        self.roots = tuple(roots)
        super().__init__(message or f"expected exactly one positive root, got {self.roots}")


class ConstraintResidualError(HypoplasticityError):
    """A solved triaxial step does not satisfy the constant radial stress condition."""


class SimulationRejected(HypocalError):
    """An element test could not be integrated for a parameter set."""

    def __init__(self, step: int, reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"step={step} reason={reason}")


# Curve comparison

class CurveMetricsError(HypocalError):
    """Failure while scaling or comparing curves."""


class DegenerateNormalizer(CurveMetricsError, ValueError):
    """An experimental normalizer is zero, so the plane cannot be scaled."""

    def __init__(self, test: str, plane: str, normalizer: str):
        self.test = test
        self.plane = plane
        self.normalizer = normalizer
        super().__init__(f"test={test} plane={plane} normalizer={normalizer} is degenerate")


# Statistics

class StatisticsError(HypocalError):
    """Failure while summarising an ensemble."""


class ZeroVarianceError(StatisticsError, ValueError):
    """A sample column is constant."""

    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} has zero variance")


# Input

class ConfigurationError(HypocalError, ValueError):
    """Run configuration is incomplete or inconsistent."""


class DatasetError(HypocalError):
    """Experimental data could not be loaded."""


class ParseError(DatasetError):
    """A data file could not be parsed."""

    def __init__(self, file, line: int, reason: str):
        self.file = str(file)
        self.line = line
        self.reason = reason
        super().__init__(f"file={self.file} line={line} reason={reason}")


class DatasetValidationError(DatasetError, ValueError):
    """A data file parsed but its content is physically inconsistent."""

    def __init__(self, file, reason: str):
        self.file = str(file)
        self.reason = reason
        super().__init__(f"file={self.file} reason={reason}")
