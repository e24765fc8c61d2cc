"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, DataError (and
subclasses) -> 2, everything else derived from HitsbenchError -> 3.
"""


class HitsbenchError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(HitsbenchError):
    """Invalid configuration or usage (bad parameter values, impossible requests)."""


class DataError(HitsbenchError):
    """Input data violates a format or integrity requirement."""


class ParseError(DataError):
    """Malformed record in an input file; message names the line number."""


class IntegrityError(DataError):
    """Duplicate identifiers or inconsistent cross-references."""


class CoverageError(DataError):
    """A collection does not cover the documents it must cover."""


class UnknownTopicError(DataError):
    """A referenced topic id does not exist."""


class DegenerateInputError(HitsbenchError):
    """Numerically degenerate input (zero vectors, empty token streams)."""


class ContractError(HitsbenchError):
    """A call violated an operation's stated precondition."""


class TrainingError(HitsbenchError):
    """Model training cannot proceed (empty or single-class training data)."""


class UndefinedMetricError(HitsbenchError):
    """A metric or statistic is undefined on the given input."""
