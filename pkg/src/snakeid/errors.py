"""Exception types shared across the pipeline.

Every error raised on a contract violation is a subclass of SnakeidError so the
CLI can catch one base class and print a single diagnostic line.
"""


class SnakeidError(Exception):
    pass


# manifest / data model
class ParseError(SnakeidError):
    pass


class DuplicateImage(SnakeidError):
    pass


class InconsistentObservation(SnakeidError):
    pass


class InconsistentVenomFlag(SnakeidError):
    pass


class EmptyTrainingSet(SnakeidError):
    pass


# binary stores
class FormatError(SnakeidError):
    pass


class TruncatedFile(SnakeidError):
    pass


class CorruptValue(SnakeidError):
    pass


# numerics
class DimensionError(SnakeidError):
    pass


class NumericalError(SnakeidError):
    pass


class ShapeError(SnakeidError):
    pass


# training / inference
class LabelRangeError(SnakeidError):
    pass


class MissingFeature(SnakeidError):
    pass


class EmptyObservation(SnakeidError):
    pass


class DuplicateObservation(SnakeidError):
    pass


class InsufficientData(SnakeidError):
    pass


# scoring
class UnknownClass(SnakeidError):
    pass


class MissingObservation(SnakeidError):
    pass


class ExtraObservation(SnakeidError):
    pass
