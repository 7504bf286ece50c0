"""Exception types shared across the pipeline.

The CLI maps ConfigError to exit code 1 and DataError (with its
subclasses) to exit code 2.
"""


class ConfigError(Exception):
    """Unusable invocation: bad flags, bad config file, missing input path."""


class DataError(Exception):
    """Input data violates a contract of the stage consuming it."""


class EmptyCorpusError(DataError):
    """No valid post survived ingestion."""


class EmptyVocabularyError(DataError):
    """Vocabulary pruning removed every term."""


class NoEmbeddingError(DataError):
    """Queried word has no vector in the embedding store."""


class UnscorableError(DataError):
    """Verb is unannotated and has no usable annotated neighbor."""


class RankDeficientError(DataError):
    """Design matrix has linearly dependent columns."""
