"""Exception types raised across the package."""

import difflib


class TimeVSMError(Exception):
    """Base class for all package errors."""


class CorpusError(TimeVSMError):
    """Raised when a record stream cannot produce a usable corpus."""


class TimestampError(TimeVSMError, ValueError):
    """Raised when a raw timestamp does not parse under the configured granularity."""


class ParameterError(TimeVSMError, ValueError):
    """Raised for invalid model or query parameters."""


class IndexCorruptionError(TimeVSMError):
    """Raised when index statistics violate their invariants."""


class UndefinedMetricError(TimeVSMError):
    """Raised when a monotony metric has no defined value (empty neighbourhoods)."""


class UnknownWordError(TimeVSMError, KeyError):
    """Raised when a phrase or word id is not part of the vocabulary.

    ``suggestions`` holds the closest vocabulary strings, best match first.
    """

    def __init__(self, word, vocabulary=()):
        self.word = word
        self.suggestions = []
        if isinstance(word, str) and vocabulary:
            self.suggestions = difflib.get_close_matches(word, vocabulary, n=5, cutoff=0.6)
        super().__init__(word)

    def __str__(self):
        msg = f"unknown word: {self.word!r}"
        if self.suggestions:
            msg += "; did you mean " + ", ".join(repr(s) for s in self.suggestions) + "?"
        return msg
