"""Multi-label indexing of title+abstract documents with kNN label ranking and ESA."""

from knnesa.errors import (
    DegenerateTrainingSet,
    FormatError,
    KnnEsaError,
    UnclassifiableDocument,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateTrainingSet",
    "FormatError",
    "KnnEsaError",
    "UnclassifiableDocument",
    "__version__",
]
