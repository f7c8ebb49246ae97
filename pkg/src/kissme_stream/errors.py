"""Exception hierarchy shared by all modules."""


class KissmeStreamError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(KissmeStreamError):
    """Structural error: operand dimensions do not agree."""


class NumericError(KissmeStreamError):
    """Non-finite values, singular matrices, or violated numeric preconditions."""


class InsufficientConstraintsError(KissmeStreamError):
    """Metric computation requested without pairs of both kinds."""


class EmptyBaseError(KissmeStreamError):
    """Nearest-neighbour query against an empty instance base."""


class SchemaError(KissmeStreamError):
    """Raw attributes do not conform to the stream schema."""


class CsvFormatError(SchemaError):
    """Malformed CSV input; the message names the offending line."""


class StreamExhaustedError(KissmeStreamError):
    """A finite stream ended before the configured instance budget."""


class ConfigError(KissmeStreamError):
    """Invalid experiment configuration."""
