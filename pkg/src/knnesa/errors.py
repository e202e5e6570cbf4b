"""Exception types shared across modules."""


class KnnEsaError(ValueError):
    """Base class for all errors raised by this package."""


class FormatError(KnnEsaError):
    """An input or persisted file is malformed or has the wrong version."""


class UnclassifiableDocument(KnnEsaError):
    """The document has no usable indexed term after preprocessing."""


class DegenerateTrainingSet(KnnEsaError):
    """Training data does not contain both classes."""
