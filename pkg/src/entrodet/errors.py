"""Exception types shared across the package."""


class DetectorError(Exception):
    """Base class for all errors raised by entrodet."""


class InvalidInputError(DetectorError, ValueError):
    """Input data or parameters violate an operation's preconditions."""


class ContractError(DetectorError):
    """A data contract between pipeline stages was violated (wrong
    normalization tag, mismatched lengths, unnormalized distributions)."""


class InvalidBandError(InvalidInputError):
    """Requested frequency band selects no bins on the analysis axis."""


class DegenerateClustersError(DetectorError):
    """Class means coincide (or nearly so); soft classification refuses to
    emit scores rather than returning 0.5 everywhere."""


class UndefinedSnrError(DetectorError):
    """SNR cannot be computed because the in-band noise power is zero."""


class UndefinedRateError(DetectorError):
    """Discovery rates are undefined (presence mask is empty or covers
    every sample)."""


class AnnotationError(DetectorError, ValueError):
    """Annotation file is malformed."""


class AudioIOError(DetectorError, OSError):
    """Audio file could not be read or written, or has an unsupported
    encoding."""
