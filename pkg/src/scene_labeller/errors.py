"""Exception hierarchy shared by every stage of the pipeline."""


class SceneLabellerError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(SceneLabellerError, ValueError):
    pass


class ParseError(SceneLabellerError, ValueError):
    pass


class UnknownLabel(SceneLabellerError, ValueError):
    """A raw dataset label has no entry in the class mapping."""


class MissingPair(SceneLabellerError):
    """An image has no label grid, or a label grid has no image."""


class EmptyDataset(SceneLabellerError):
    pass


class EmptyEvalSet(SceneLabellerError):
    pass


class OutOfBounds(SceneLabellerError, IndexError):
    pass


class InsufficientData(SceneLabellerError, ValueError):
    pass


class EmptyRegion(SceneLabellerError, ValueError):
    pass


class ClassUnderrepresented(SceneLabellerError, ValueError):
    pass


class VersionMismatch(SceneLabellerError):
    pass


class CorruptModel(SceneLabellerError):
    pass


class DimensionInconsistency(SceneLabellerError):
    pass
